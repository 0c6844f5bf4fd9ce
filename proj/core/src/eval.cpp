// Copyright 2026 The rlqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rlqc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "rlqc/errors.hpp"
#include "rlqc/rng.hpp"

namespace rlqc {

double percentile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        return 0.0;
    }
    const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

EvalReport summarize(std::span<const TargetOutcome> outcomes, double tolerance) {
    EvalReport r;
    r.n_targets = static_cast<int>(outcomes.size());
    r.tolerance = tolerance;
    std::vector<double> lengths;
    double step_time = 0.0;
    int timed = 0;
    for (const auto &o : outcomes) {
        if (o.solved) {
            lengths.push_back(o.length);
        }
        if (o.length > 0) {
            step_time += o.seconds_per_step;
            ++timed;
        }
    }
    r.n_solved = static_cast<int>(lengths.size());
    if (r.n_targets > 0) {
        r.solved_pct = 100.0 * r.n_solved / r.n_targets;
    }
    if (!lengths.empty()) {
        std::sort(lengths.begin(), lengths.end());
        double sum = 0.0;
        for (double l : lengths) {
            sum += l;
        }
        r.mean_length = sum / static_cast<double>(lengths.size());
        r.p95_length = percentile_sorted(lengths, 95.0);
        r.p99_length = percentile_sorted(lengths, 99.0);
    }
    r.mean_seconds_per_step = timed > 0 ? step_time / timed : 0.0;
    return r;
}

std::uint64_t target_seed(std::uint64_t seed, int id) {
    return RngStream(seed).split(static_cast<std::uint64_t>(id)).seed();
}

EvalResult evaluate(const Policy &policy, const EnvConfig &env, const TargetSpec &targets, int n_targets,
                    std::uint64_t seed, const EvalOptions &options) {
    if (n_targets < 1) {
        throw ValidationError("evaluate needs at least one target");
    }
    env.validate();
    policy.check_actions(env.gateset->size());
    EvalResult result;
    result.targets.resize(static_cast<std::size_t>(n_targets));

    auto run_range = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            const std::uint64_t s = target_seed(seed, i);
            TargetGenerator gen(targets, env.gateset, RngStream(s));
            const UnitaryMatrix target = gen.next();
            RngStream act_rng = RngStream(s).split(1);
            const CompilationResult c = compile_with_policy(policy, env, target, options.mode, &act_rng);
            result.targets[static_cast<std::size_t>(i)] = {i, c.solved, c.length, c.final_agf, s, c.seconds_per_step};
        }
    };
    const int threads = std::clamp(options.threads, 1, n_targets);
    if (threads == 1) {
        run_range(0, n_targets);
    } else {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    run_range(t * n_targets / threads, (t + 1) * n_targets / threads);
                } catch (...) {
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
                }
            });
        }
        for (auto &th : pool) {
            th.join();
        }
        for (auto &e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }
    result.report = summarize(result.targets, env.tolerance_agf);
    return result;
}

namespace {

void fit_quality(PolylogFit &fit, std::span<const double> x, std::span<const double> y) {
    double mean = 0.0;
    for (double v : y) {
        mean += v;
    }
    mean /= static_cast<double>(y.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - fit.a * std::pow(x[i], fit.b);
        ss_res += r * r;
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    fit.rmse = std::sqrt(ss_res / static_cast<double>(y.size()));
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
}

}  // namespace

PolylogFit fit_polylog(std::span<const double> deltas, std::span<const double> lengths) {
    if (deltas.size() != lengths.size()) {
        throw DomainError("fit_polylog: deltas and lengths differ in size");
    }
    if (deltas.size() < 3) {
        throw DomainError("fit_polylog needs at least 3 points");
    }
    const std::size_t n = deltas.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(deltas[i] > 0.0 && deltas[i] < 1.0)) {
            throw DomainError("fit_polylog: delta must lie in (0, 1)");
        }
        if (!(lengths[i] > 0.0) || !std::isfinite(lengths[i])) {
            throw DomainError("fit_polylog: lengths must be positive");
        }
        x[i] = std::log(1.0 / deltas[i]);
    }

    // log L = log a + b log x
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(lengths[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double dn = static_cast<double>(n);
    const double denom = dn * sxx - sx * sx;
    PolylogFit fit;
    const double y_min = *std::min_element(lengths.begin(), lengths.end());
    const double y_max = *std::max_element(lengths.begin(), lengths.end());
    if (std::abs(denom) < 1e-14 * std::max(1.0, dn * sxx)) {
        // All deltas equal: only the scale is identifiable.
        fit.a = std::exp(sy / dn);
        fit.degenerate = true;
        fit_quality(fit, x, lengths);
        return fit;
    }
    fit.b = (dn * sxy - sx * sy) / denom;
    fit.a = std::exp((sy - fit.b * sx) / dn);
    if (y_max - y_min <= 1e-12 * y_max) {
        fit.b = 0.0;
        fit.a = y_max;
        fit.degenerate = true;
        fit_quality(fit, x, lengths);
        return fit;
    }

    auto sse = [&](double a, double b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = lengths[i] - a * std::pow(x[i], b);
            s += r * r;
        }
        return s;
    };
    double current = sse(fit.a, fit.b);
    double damping = 1e-3;
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        fit.iterations = it + 1;
        // Normal equations of the linearized residual, Levenberg-damped.
        double jaa = 0.0, jab = 0.0, jbb = 0.0, ga = 0.0, gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = std::pow(x[i], fit.b);
            const double da = p;
            const double db = fit.a * p * std::log(x[i]);
            const double r = lengths[i] - fit.a * p;
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        bool improved = false;
        for (int tries = 0; tries < 30 && !improved; ++tries) {
            const double m00 = jaa * (1.0 + damping);
            const double m11 = jbb * (1.0 + damping);
            const double det = m00 * m11 - jab * jab;
            if (!(std::abs(det) > 0.0)) {
                damping *= 10.0;
                continue;
            }
            const double step_a = (m11 * ga - jab * gb) / det;
            const double step_b = (m00 * gb - jab * ga) / det;
            const double trial = sse(fit.a + step_a, fit.b + step_b);
            if (std::isfinite(trial) && trial <= current) {
                const double rel = std::abs(step_a) / std::max(1e-300, std::abs(fit.a)) + std::abs(step_b);
                fit.a += step_a;
                fit.b += step_b;
                current = trial;
                damping = std::max(damping * 0.1, 1e-12);
                improved = true;
                if (rel < 1e-12) {
                    converged = true;
                }
            } else {
                damping *= 10.0;
            }
        }
        if (!improved || converged) {
            // No descent direction left: the current point is a local minimum.
            converged = true;
            break;
        }
    }
    fit.degenerate = !converged;
    fit_quality(fit, x, lengths);
    return fit;
}

ScalingResult scaling_study(const Policy &policy, const EnvConfig &env, std::span<const double> tolerances,
                            const TargetSpec &targets, int n_per_point, std::uint64_t seed,
                            const EvalOptions &options) {
    if (tolerances.size() < 3) {
        throw DomainError("scaling_study needs at least 3 tolerance points");
    }
    ScalingResult out;
    std::vector<double> fit_delta;
    std::vector<double> fit_len;
    for (double tol : tolerances) {
        EnvConfig e = env;
        e.tolerance_agf = tol;
        const EvalResult r = evaluate(policy, e, targets, n_per_point, seed, options);
        ScalingPoint p{1.0 - tol, r.report.mean_length, r.report.n_solved, r.report.n_targets};
        if (p.n_solved == 0) {
            p.mean_length = std::numeric_limits<double>::quiet_NaN();
        } else {
            fit_delta.push_back(p.delta);
            fit_len.push_back(p.mean_length);
        }
        out.points.push_back(p);
    }
    if (fit_delta.size() >= 3) {
        out.fit = fit_polylog(fit_delta, fit_len);
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out.fit = {nan, nan, nan, nan, true, 0};
    }
    return out;
}

}  // namespace rlqc
