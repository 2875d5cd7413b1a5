#pragma once

#include "lacuna/lemmas.hpp"
#include "lacuna/poly.hpp"
#include "lacuna/report.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace lacuna {

std::uint64_t splitmix64(std::uint64_t x);

/// Per-instance stream: depends only on (seed, id), so instances can run in
/// any order on any thread.
class InstanceRng {
public:
    InstanceRng(std::uint64_t seed, std::uint64_t id);
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    /// Uniform on {lo, ..., hi}.
    int integer(int lo, int hi);

private:
    std::mt19937_64 gen_;
};

/// Chebyshev coefficients uniform in [-1,1], scaled by the certified upper
/// bound of the sup norm, so ||p|| <= 1 and ||p|| >= 1 - tol.
Poly random_unit_poly(InstanceRng& rng, int degree, long bits);

struct SweepRecord {
    long id = 0;
    std::string lemma;
    std::string status;  // pass, fail, skipped, error
    Real claimed;
    Real measured;
    Real slack{1};
    bool pass = false;
    bool pass_slack4 = false;  // spreading only
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json certificate;  // null for vmarkov/remez rows and skipped instances
    std::string message;
};

struct SweepOptions {
    std::string lemma;  // vmarkov, remez, spreading, claim, comparison
    int count = 500;
    int max_degree = 0;  // 0: lemma default (30, 30, 40, 40, unused)
    int threads = 0;     // 0: hardware concurrency
    bool enforce_kappa = true;
};

struct SweepResult {
    std::string lemma;
    std::uint64_t seed = 0;
    std::vector<SweepRecord> records;  // ordered by id

    int count(const std::string& status) const;
    int pass_slack4() const;
    nlohmann::json summary() const;
    /// instance_id, lemma, claimed, measured, slack, pass
    std::string to_csv() const;
    /// One certificate or record object per line.
    std::string to_jsonl() const;
};

const std::vector<std::string>& sweep_lemmas();

/// Runs instances in parallel; records come back ordered by instance id.
SweepResult run_sweep(const SweepOptions& opts, const RunConfig& cfg);

/// Runs fn(id) for id in [0, count) on `threads` workers, each inside a
/// PrecisionScope of `bits`.
void parallel_for(int count, int threads, long bits, const std::function<void(int)>& fn);

/// Writes sweep_<lemma>.json / .csv and, for json output, sweep_<lemma>.jsonl.
std::vector<std::filesystem::path> emit_sweep(const SweepResult& r, const RunConfig& cfg);

}  // namespace lacuna
