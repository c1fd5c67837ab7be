#include "gridforest/permutation_search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <map>

#include "gridforest/log.hpp"

namespace gridforest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct EvalResult {
    bool feasible = false;
    double loss_kw = kInf;
    SolverReport report;
};

uint64_t set_hash(const std::vector<int>& set) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (int b : set) {
        h ^= static_cast<uint64_t>(b) + 1;
        h *= 0x100000001b3ULL;
    }
    return h;
}

EvalResult run_oracle(const DistributionNetwork& net, const std::vector<int>& set,
                      const SolverOptions& forward_options, uint64_t master_seed) {
    SolverOptions opts = forward_options;
    // sub-seed depends on the set only, so memoized and speculative
    // evaluations agree with serial execution
    opts.seed = combine_seed(master_seed, set_hash(set));
    EvalResult result;
    try {
        result.report = forward_solve(net, set, opts);
        result.feasible = result.report.feasibility.feasible;
        result.loss_kw = result.feasible ? result.report.exact_loss_kw : kInf;
    } catch (const SolverError&) {
        result.feasible = false;
        result.loss_kw = kInf;
    }
    return result;
}

}  // namespace

std::vector<int> greedy_init(const DistributionNetwork& net, int kappa) {
    const auto& pool = net.generator_pool;
    if (kappa < 1 || kappa > static_cast<int>(pool.size()))
        raise(ErrorKind::KappaTooLarge,
              "kappa " + std::to_string(kappa) + " outside [1, " + std::to_string(pool.size()) + "]");

    std::vector<std::pair<double, int>> scored;
    for (int g : pool) {
        std::vector<double> dist = electrical_distances(net, g);
        double score = 0.0;
        for (int b = 0; b < net.n_buses(); ++b) {
            double d = net.scalar_demand_pu(b);
            if (d > 0.0 && dist[b] < kInf) score += d / (1.0 + dist[b]);
        }
        scored.push_back({score, g});
    }
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return net.buses[a.second].id < net.buses[b.second].id;
    });
    std::vector<int> out;
    for (int i = 0; i < kappa; ++i) out.push_back(scored[i].second);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> neighbor(const std::vector<int>& set, const std::vector<int>& pool, Rng& rng) {
    std::vector<int> complement;
    for (int g : pool)
        if (!std::binary_search(set.begin(), set.end(), g)) complement.push_back(g);
    if (complement.empty())
        raise(ErrorKind::NoSwapAvailable, "kappa equals the generator pool size");
    size_t out_idx = rng.next_below(set.size());
    size_t in_idx = rng.next_below(complement.size());
    std::vector<int> next = set;
    next[out_idx] = complement[in_idx];
    std::sort(next.begin(), next.end());
    return next;
}

int64_t t_max(int kappa, int n_g, double target_p) {
    double bound = target_p * static_cast<double>(kappa) * static_cast<double>(n_g) *
                   (2.0 + std::log(static_cast<double>(n_g)));
    return std::max<int64_t>(1, static_cast<int64_t>(std::ceil(bound)));
}

SolverReport permutation_search(const DistributionNetwork& net, const SearchOptions& options) {
    const auto& pool = net.generator_pool;
    const int n_g = static_cast<int>(pool.size());
    if (options.kappa < 1 || options.kappa > n_g)
        raise(ErrorKind::KappaTooLarge, "kappa outside [1, n_g]");

    auto t_start = std::chrono::steady_clock::now();

    std::vector<int> current = options.warm_start ? *options.warm_start : greedy_init(net, options.kappa);
    std::sort(current.begin(), current.end());
    if (static_cast<int>(current.size()) != options.kappa)
        raise(ErrorKind::Validation, "warm-start set size differs from kappa");
    for (int g : current)
        if (!std::binary_search(pool.begin(), pool.end(), g))
            raise(ErrorKind::Validation, "warm-start bus is not in the generator pool");

    std::map<std::vector<int>, EvalResult> memo;
    int64_t forward_runs = 0;
    auto evaluate = [&](const std::vector<int>& set) -> const EvalResult& {
        auto it = memo.find(set);
        if (it == memo.end()) {
            ++forward_runs;
            it = memo.emplace(set, run_oracle(net, set, options.forward, options.seed)).first;
        }
        return it->second;
    };

    const int64_t budget =
        std::max<int64_t>(options.max_iters.value_or(0), t_max(options.kappa, n_g, options.target_p));

    std::vector<TraceStep> trace;
    std::optional<std::vector<int>> incumbent_set;
    double incumbent_loss = kInf;
    double f_accepted = kInf;
    int64_t evaluations = 0;
    int64_t stall = 0;

    auto record_step = [&](const std::vector<int>& set, const EvalResult& result, bool accepted) {
        ++evaluations;
        bool improved = result.feasible && result.loss_kw < incumbent_loss;
        if (improved) {
            incumbent_loss = result.loss_kw;
            incumbent_set = set;
            stall = 0;
        } else {
            ++stall;
        }
        TraceStep step;
        step.active_set = set;
        step.feasible = result.feasible;
        step.loss_kw = result.feasible ? result.loss_kw : 0.0;
        step.accepted = accepted;
        step.incumbent_kw = incumbent_loss < kInf ? incumbent_loss : 0.0;
        trace.push_back(std::move(step));
    };

    {
        const EvalResult& init = evaluate(current);
        if (init.feasible) f_accepted = init.loss_kw;
        record_step(current, init, true);
    }
    double init_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    auto epsilon_at = [&](int64_t it) {
        double anchor = incumbent_loss < kInf ? incumbent_loss : 0.0;
        if (!options.epsilon_schedule) return options.epsilon_rel * anchor;
        if (budget <= 1) return options.epsilon_end * anchor;
        double frac = static_cast<double>(it - 1) / static_cast<double>(budget - 1);
        double rel = options.epsilon_start * std::pow(options.epsilon_end / options.epsilon_start, frac);
        return rel * anchor;
    };

    const bool degenerate = options.kappa == n_g;  // single state, nothing to swap
    Rng rng(combine_seed(options.seed, 0x5eedba5eULL));
    int64_t it = 0;
    bool stopped = false;

    while (!degenerate && it < budget && !stopped) {
        const int batch =
            static_cast<int>(std::min<int64_t>(std::max(1, options.parallel), budget - it));

        // speculative draws: the next `batch` swaps the serial walk would try
        // if every one of them were rejected
        std::vector<std::mt19937_64> rng_after;
        std::vector<std::vector<int>> cands;
        for (int j = 0; j < batch; ++j) {
            cands.push_back(neighbor(current, pool, rng));
            rng_after.push_back(rng.engine());
        }

        // evaluate memo misses, concurrently when allowed
        if (batch > 1) {
            std::vector<std::pair<size_t, std::future<EvalResult>>> jobs;
            for (size_t j = 0; j < cands.size(); ++j) {
                if (memo.count(cands[j])) continue;
                bool queued = false;
                for (size_t q = 0; q < j && !queued; ++q) queued = cands[q] == cands[j];
                if (queued) continue;
                jobs.emplace_back(j, std::async(std::launch::async, [&, j] {
                                      return run_oracle(net, cands[j], options.forward, options.seed);
                                  }));
            }
            for (auto& [j, fut] : jobs) {
                memo.emplace(cands[j], fut.get());
                ++forward_runs;
            }
        }

        for (int j = 0; j < batch; ++j) {
            ++it;
            const EvalResult& result = evaluate(cands[j]);
            const double eps = epsilon_at(it);
            const bool accept = result.feasible && result.loss_kw <= f_accepted + eps;
            record_step(cands[j], result, accept);
            if (options.stall_limit > 0 && stall >= options.stall_limit) {
                stopped = true;
                log::info("early stop after %lld non-improving iterations", static_cast<long long>(stall));
                break;
            }
            if (accept) {
                current = cands[j];
                f_accepted = result.loss_kw;
                rng.engine() = rng_after[j];  // discard speculative draws past j
                break;
            }
        }
    }

    if (!incumbent_set)
        raise(ErrorKind::NoFeasibleSolution, "no evaluated generator set produced a feasible configuration");

    SolverReport report = memo.at(*incumbent_set).report;
    report.problem = 2;
    report.seed = options.seed;
    report.kappa = options.kappa;
    report.active_set = *incumbent_set;
    report.trace = std::move(trace);
    report.evaluations = evaluations;
    report.forward_runs = forward_runs;
    report.timings_s.clear();
    report.timings_s["init_s"] = init_s;
    double total_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    report.timings_s["search_s"] = total_s - init_s;
    report.timings_s["total_s"] = total_s;
    return report;
}

}  // namespace gridforest
