#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "greenai/metrics.hpp"

namespace greenai {

enum class EnergySource { modeled, wallclock_proxy, os_counter };

inline const char* to_string(EnergySource s) {
    switch (s) {
        case EnergySource::modeled: return "modeled";
        case EnergySource::wallclock_proxy: return "wallclock_proxy";
        case EnergySource::os_counter: return "os_counter";
    }
    return "unknown";
}

/// One measured section: energy in microwatt-hours plus the section duration.
struct EnergySample {
    double energy_uwh = 0.0;
    Milliseconds duration{0.0};
    EnergySource source = EnergySource::modeled;
};

/// Microjoules to microwatt-hours (1 uWh = 3600 uJ) and back.
inline double uj_to_uwh(double uj) { return uj / 3600.0; }
inline double uwh_to_uj(double uwh) { return uwh * 3600.0; }

/// Energy of a timed section under a constant-power assumption.
inline double proxy_energy_uwh(Milliseconds duration, double watts) {
    // W * ms = mJ; 1 uWh = 3.6 mJ
    return watts * duration.count() / 3.6;
}

/// Convert an energy sample to grams of CO2-equivalent.
/// intensity is in grams CO2e per kWh; 1 uWh = 1e-9 kWh.
inline double to_carbon(const EnergySample& sample, double intensity_g_per_kwh) {
    if (intensity_g_per_kwh < 0.0)
        throw std::invalid_argument("to_carbon: negative carbon intensity");
    return sample.energy_uwh * 1e-9 * intensity_g_per_kwh;
}

/// Declared per-prediction energy costs for a model chain, in energy units
/// (microwatt-hours unless stated otherwise by the caller).
struct CostModel {
    std::vector<double> per_model_cost; // index i = chain model i+1
    double router_cost = 0.0;

    void validate() const {
        for (double c : per_model_cost)
            if (!(c >= 0.0) || !std::isfinite(c))
                throw std::invalid_argument("CostModel: costs must be finite and non-negative");
        if (!(router_cost >= 0.0) || !std::isfinite(router_cost))
            throw std::invalid_argument("CostModel: router cost must be finite and non-negative");
    }
};

/// Measurement contract. begin()/end() bracket a measured section; the
/// modeled meter additionally consumes invocation counts recorded inside the
/// section. end() without a matching begin() throws std::logic_error.
class EnergyMeter {
public:
    virtual ~EnergyMeter() = default;

    void begin() {
        if (active_) throw std::logic_error("EnergyMeter: begin() while already measuring");
        active_ = true;
        on_begin();
    }

    EnergySample end() {
        if (!active_) throw std::logic_error("EnergyMeter: end() without begin()");
        active_ = false;
        return on_end();
    }

    /// Charge `count` predictions to chain model `model_index` (1-based).
    /// No-op for meters that do not account per model.
    virtual void record_model_invocation(int model_index, std::int64_t count) {
        (void)model_index;
        (void)count;
    }

    /// Charge `count` router decisions.
    virtual void record_router_invocation(std::int64_t count) { (void)count; }

    virtual EnergySource source() const = 0;

protected:
    virtual void on_begin() = 0;
    virtual EnergySample on_end() = 0;

private:
    bool active_ = false;
};

/// Deterministic accounting meter: energy is exactly the dot product of the
/// recorded invocation counts with the declared per-prediction costs. The
/// reported duration is 0 (no time is modeled), which keeps reports produced
/// with this meter reproducible byte-for-byte.
class ModeledMeter final : public EnergyMeter {
public:
    explicit ModeledMeter(CostModel cost_model) : costs_(std::move(cost_model)) {
        costs_.validate();
        counts_ = std::make_unique<std::atomic<std::int64_t>[]>(costs_.per_model_cost.size());
        reset_counts();
    }

    void record_model_invocation(int model_index, std::int64_t count) override {
        if (model_index < 1 || static_cast<std::size_t>(model_index) > costs_.per_model_cost.size())
            throw std::out_of_range("ModeledMeter: unknown model index " +
                                    std::to_string(model_index));
        if (count < 0) throw std::invalid_argument("ModeledMeter: negative count");
        counts_[static_cast<std::size_t>(model_index - 1)].fetch_add(count, std::memory_order_relaxed);
    }

    void record_router_invocation(std::int64_t count) override {
        if (count < 0) throw std::invalid_argument("ModeledMeter: negative count");
        router_count_.fetch_add(count, std::memory_order_relaxed);
    }

    EnergySource source() const override { return EnergySource::modeled; }

    const CostModel& cost_model() const { return costs_; }

protected:
    void on_begin() override { reset_counts(); }

    EnergySample on_end() override {
        // counts are integers and each cost is multiplied exactly once, so the
        // total is independent of recording order
        double energy = 0.0;
        for (std::size_t i = 0; i < costs_.per_model_cost.size(); ++i)
            energy += static_cast<double>(counts_[i].load()) * costs_.per_model_cost[i];
        energy += static_cast<double>(router_count_.load()) * costs_.router_cost;
        return EnergySample{energy, Milliseconds{0.0}, EnergySource::modeled};
    }

private:
    void reset_counts() {
        for (std::size_t i = 0; i < costs_.per_model_cost.size(); ++i) counts_[i].store(0);
        router_count_.store(0);
    }

    CostModel costs_;
    std::unique_ptr<std::atomic<std::int64_t>[]> counts_;
    std::atomic<std::int64_t> router_count_{0};
};

/// Portable fallback: wall-clock duration times a configured constant power.
/// Samples are tagged wallclock_proxy so reports disclose the estimate.
class WallclockProxyMeter final : public EnergyMeter {
public:
    explicit WallclockProxyMeter(double watts = 10.0) : watts_(watts) {
        if (!(watts >= 0.0)) throw std::invalid_argument("proxy meter: negative power");
    }

    EnergySource source() const override { return EnergySource::wallclock_proxy; }
    double watts() const { return watts_; }

protected:
    void on_begin() override { start_ = std::chrono::steady_clock::now(); }

    EnergySample on_end() override {
        const Milliseconds d = std::chrono::steady_clock::now() - start_;
        return EnergySample{proxy_energy_uwh(d, watts_), d, EnergySource::wallclock_proxy};
    }

private:
    double watts_;
    std::chrono::steady_clock::time_point start_;
};

/// Reads cumulative package-energy counters (powercap-style ASCII microjoule
/// files). Each path may have a sibling max_energy_range_uj file used for
/// wraparound correction. Paths come from the constructor, the
/// GREENAI_POWERCAP_PATH environment variable (colon-separated), or the
/// default intel-rapl package-0 location, in that order.
class OsCounterMeter final : public EnergyMeter {
public:
    struct Counter {
        std::string energy_path;
        std::optional<std::uint64_t> max_range_uj; // absent: no wrap correction possible
    };

    explicit OsCounterMeter(std::vector<std::string> paths = {}) {
        for (const std::string& p : resolve_paths(std::move(paths)))
            counters_.push_back(Counter{p, read_max_range(p)});
        if (counters_.empty())
            throw std::runtime_error("os counter meter: no counter paths configured");
        for (const Counter& c : counters_) {
            if (!read_counter_uj(c.energy_path))
                throw std::runtime_error("os counter meter: cannot read " + c.energy_path);
        }
    }

    /// True when at least one configured counter file is readable.
    static bool available(const std::vector<std::string>& paths = {}) {
        for (const std::string& p : resolve_paths(paths))
            if (read_counter_uj(p)) return true;
        return false;
    }

    EnergySource source() const override { return EnergySource::os_counter; }

protected:
    void on_begin() override {
        start_uj_.clear();
        for (const Counter& c : counters_) start_uj_.push_back(must_read(c));
        start_time_ = std::chrono::steady_clock::now();
    }

    EnergySample on_end() override {
        const Milliseconds d = std::chrono::steady_clock::now() - start_time_;
        double total_uj = 0.0;
        for (std::size_t i = 0; i < counters_.size(); ++i) {
            const std::uint64_t before = start_uj_[i];
            const std::uint64_t after = must_read(counters_[i]);
            std::uint64_t delta;
            if (after >= before) {
                delta = after - before;
            } else if (counters_[i].max_range_uj) {
                delta = (*counters_[i].max_range_uj - before) + after;
            } else {
                delta = 0; // wrapped with unknown range; undercount rather than guess
            }
            total_uj += static_cast<double>(delta);
        }
        return EnergySample{uj_to_uwh(total_uj), d, EnergySource::os_counter};
    }

private:
    static std::vector<std::string> resolve_paths(std::vector<std::string> paths) {
        if (!paths.empty()) return paths;
        if (const char* env = std::getenv("GREENAI_POWERCAP_PATH")) {
            std::vector<std::string> out;
            std::stringstream ss(env);
            std::string item;
            while (std::getline(ss, item, ':'))
                if (!item.empty()) out.push_back(item);
            if (!out.empty()) return out;
        }
        return {"/sys/class/powercap/intel-rapl:0/energy_uj"};
    }

    static std::optional<std::uint64_t> read_counter_uj(const std::string& path) {
        std::ifstream f(path);
        std::uint64_t v;
        if (f >> v) return v;
        return std::nullopt;
    }

    static std::optional<std::uint64_t> read_max_range(const std::string& energy_path) {
        const auto slash = energy_path.find_last_of('/');
        const std::string dir = slash == std::string::npos ? "." : energy_path.substr(0, slash);
        return read_counter_uj(dir + "/max_energy_range_uj");
    }

    std::uint64_t must_read(const Counter& c) const {
        auto v = read_counter_uj(c.energy_path);
        if (!v) throw std::runtime_error("os counter meter: failed reading " + c.energy_path);
        return *v;
    }

    std::vector<Counter> counters_;
    std::vector<std::uint64_t> start_uj_;
    std::chrono::steady_clock::time_point start_time_;
};

enum class MeterChoice { modeled, proxy, oscounter };

inline const char* to_string(MeterChoice m) {
    switch (m) {
        case MeterChoice::modeled: return "modeled";
        case MeterChoice::proxy: return "proxy";
        case MeterChoice::oscounter: return "oscounter";
    }
    return "unknown";
}

/// Build the requested meter. When the OS counter is requested but not
/// readable, falls back to the wall-clock proxy and says so on stderr.
inline std::unique_ptr<EnergyMeter> make_meter(MeterChoice choice,
                                               const CostModel& cost_model,
                                               double proxy_watts = 10.0,
                                               std::vector<std::string> counter_paths = {}) {
    switch (choice) {
        case MeterChoice::modeled:
            return std::make_unique<ModeledMeter>(cost_model);
        case MeterChoice::proxy:
            return std::make_unique<WallclockProxyMeter>(proxy_watts);
        case MeterChoice::oscounter:
            if (OsCounterMeter::available(counter_paths))
                return std::make_unique<OsCounterMeter>(std::move(counter_paths));
            std::cerr << "greenai: os energy counter unavailable, falling back to "
                         "wall-clock proxy meter (" << proxy_watts << " W)\n";
            return std::make_unique<WallclockProxyMeter>(proxy_watts);
    }
    throw std::invalid_argument("make_meter: unknown meter choice");
}

} // namespace greenai
