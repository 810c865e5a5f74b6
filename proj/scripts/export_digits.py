#!/usr/bin/env python3
"""Export the scikit-learn digits dataset (UCI optdigits-derived) to CSV.

Each line: 64 integer pixel values in [0, 16] followed by the label in [0, 9].
"""
import numpy as np
from sklearn.datasets import load_digits

d = load_digits()
rows = np.hstack([d.data.astype(int), d.target.reshape(-1, 1)])
np.savetxt("data/digits.csv", rows, fmt="%d", delimiter=",")
print(f"wrote data/digits.csv: {rows.shape[0]} rows, {rows.shape[1]} columns")
