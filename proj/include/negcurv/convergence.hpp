#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace negcurv {

/// Least-squares slope of log(error) against log(h). All-zero errors are
/// reported as exact; zero entries are otherwise skipped.
struct OrderFit {
    std::optional<double> order;
    bool exact = false;

    nlohmann::json to_json() const;
};

OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& error);

struct ConvergenceOptions {
    /// Grid points per unit length; h = 1 / level.
    std::vector<int> levels{16, 32, 64};
    std::uint64_t seed = 1;
    /// Used by the checks that exist in both dimensions.
    int dim = 3;
    /// Random polynomials per level for the identity checks.
    int samples = 3;
};

struct ConvergenceLevel {
    int level = 0;
    double h = 0.0;
    /// Worst error over the samples.
    double error = 0.0;
    std::vector<double> sample_errors;
};

struct ConvergenceReport {
    std::string check;
    int dim = 0;
    std::vector<ConvergenceLevel> levels;
    /// Fit of the worst error per level.
    OrderFit fit;
    /// One fit per random sample, empty for deterministic checks.
    std::vector<OrderFit> sample_fits;
    double required_order = 1.8;

    /// The worst-error fit and every sample fit reach the required order.
    bool passed() const;
    nlohmann::json to_json() const;
};

std::vector<std::string> registered_checks();

/// Runs the named invariant at each level. Throws UnknownCheck.
ConvergenceReport convergence_harness(const std::string& check, const ConvergenceOptions& options = {});

}  // namespace negcurv
