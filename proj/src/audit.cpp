#include "quqcd/audit.hpp"

#include <cmath>
#include <string>

#include "quqcd/parallel.hpp"

namespace quqcd {

namespace {

void check_full_support(const ProbabilityVector& p) {
  p.validate();
  for (double v : p.probs)
    if (v <= 0.0)
      throw Error(ErrorKind::BadInput, "distribution must have full support");
}

MeanSe mean_and_se(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (n - 1.0);
  return MeanSe{mean, std::sqrt(var / n)};
}

/// Window counts from w draws, then the per-trial loss via `score`.
template <class Score>
MeanSe window_monte_carlo(const ProbabilityVector& p, int w, int trials,
                          std::uint64_t seed, unsigned threads, Score score) {
  check_full_support(p);
  if (w < 1) throw Error(ErrorKind::BadInput, "window must be >= 1");
  if (trials < 100) throw Error(ErrorKind::BadInput, "trials must be >= 100");

  const CategoricalSampler sampler(p.probs);
  const int d = static_cast<int>(p.size());
  std::vector<double> losses(trials);
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    CounterRng rng = CounterRng::for_stream(seed, t);
    std::vector<std::int64_t> counts(d, 0);
    for (int i = 0; i < w; ++i) ++counts[sampler.sample(rng)];
    losses[t] = score(counts, rng);
  });
  return mean_and_se(losses);
}

}  // namespace

MeanSe condition1_estimate(const ProbabilityVector& p, int w, int trials,
                           std::uint64_t seed, unsigned threads) {
  const int d = static_cast<int>(p.size());
  const double denom = static_cast<double>(w + d);
  return window_monte_carlo(
      p, w, trials, seed, threads,
      [&](const std::vector<std::int64_t>& counts, CounterRng&) {
        double kl = 0.0;
        for (int j = 0; j < d; ++j) {
          const double phat = (1.0 + static_cast<double>(counts[j])) / denom;
          kl += p.probs[j] * std::log(p.probs[j] / phat);
        }
        return kl;
      });
}

MeanSe condition2_estimate(const ProbabilityVector& p, int w, int trials,
                           std::uint64_t seed, unsigned threads) {
  const int d = static_cast<int>(p.size());
  const double denom = static_cast<double>(w + d);
  const CategoricalSampler scorer(p.probs);
  return window_monte_carlo(
      p, w, trials, seed, threads,
      [&](const std::vector<std::int64_t>& counts, CounterRng& rng) {
        const int x = scorer.sample(rng);
        const double phat = (1.0 + static_cast<double>(counts[x])) / denom;
        const double z = std::log(p.probs[x] / phat);
        return z * z;
      });
}

ProbabilityVector uniform_distribution(int d) {
  if (d < 1) throw Error(ErrorKind::BadInput, "support must be >= 1");
  return ProbabilityVector::with_numeric_labels(
      std::vector<double>(d, 1.0 / static_cast<double>(d)));
}

ProbabilityVector sample_floor_simplex(int d, double floor, CounterRng& rng) {
  if (d < 1) throw Error(ErrorKind::BadInput, "support must be >= 1");
  if (floor < 0.0 || floor * d >= 1.0)
    throw Error(ErrorKind::BadInput,
                "floor " + std::to_string(floor) + " infeasible for d = " +
                    std::to_string(d));
  // A uniform draw on the floored slice is floor + (1 - d*floor) * Dirichlet.
  std::vector<double> g(d);
  double total = 0.0;
  for (int j = 0; j < d; ++j) {
    g[j] = rng.next_exponential();
    total += g[j];
  }
  const double free_mass = 1.0 - floor * static_cast<double>(d);
  std::vector<double> probs(d);
  for (int j = 0; j < d; ++j) probs[j] = floor + free_mass * g[j] / total;
  return ProbabilityVector::with_numeric_labels(std::move(probs));
}

DecayFit fit_decay(const std::vector<int>& windows,
                   const std::vector<double>& means,
                   const std::vector<double>& ses) {
  if (windows.size() != means.size() || windows.size() != ses.size() ||
      windows.size() < 2)
    throw Error(ErrorKind::BadInput,
                "need >= 2 aligned (window, mean, se) triples");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i] < 1 || means[i] <= 0.0)
      throw Error(ErrorKind::BadInput, "windows and means must be positive");
    if (ses[i] < 0.0)
      throw Error(ErrorKind::BadInput, "standard errors must be >= 0");
    const double x = std::log(static_cast<double>(windows[i]));
    const double y = std::log(means[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0)
    throw Error(ErrorKind::BadInput, "window grid has no spread");
  DecayFit fit;
  fit.exponent = -(n * sxy - sx * sy) / denom;
  // Slope is sum_i c_i y_i with c_i = (x_i - xbar) / Sxx; points are
  // independent, so Var = sum_i c_i^2 (se_i / mean_i)^2.
  const double sxx_centered = denom / n;
  double var = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const double c =
        (std::log(static_cast<double>(windows[i])) - sx / n) / sxx_centered;
    const double rel = ses[i] / means[i];
    var += c * c * rel * rel;
  }
  fit.se = std::sqrt(var);
  return fit;
}

double fit_decay_exponent(const std::vector<int>& windows,
                          const std::vector<double>& means) {
  return fit_decay(windows, means, std::vector<double>(windows.size(), 0.0))
      .exponent;
}

AuditReport run_audit(const AuditConfig& config) {
  if (config.windows.empty())
    throw Error(ErrorKind::BadInput, "window grid is empty");
  if (config.support_multiplier <= 0.0)
    throw Error(ErrorKind::BadInput, "support multiplier must be positive");
  if (config.floor_coefficient < 0.0 || config.floor_coefficient > 1.0)
    throw Error(ErrorKind::BadInput, "floor coefficient must be in [0, 1]");

  AuditReport report;
  for (std::size_t i = 0; i < config.windows.size(); ++i) {
    const int w = config.windows[i];
    if (w < 1) throw Error(ErrorKind::BadInput, "window must be >= 1");
    const int d = static_cast<int>(
        std::ceil(config.support_multiplier * std::sqrt(static_cast<double>(w))));

    ProbabilityVector p;
    if (config.family == AuditFamily::Uniform) {
      p = uniform_distribution(d);
    } else {
      // Deterministic per-row distribution: one stream per grid position.
      CounterRng rng = CounterRng::for_stream(mix64(config.seed ^ 0xf1e2d3c4b5a69788ULL), i);
      const double floor =
          config.floor_coefficient / std::sqrt(static_cast<double>(w));
      if (floor * d >= 1.0)
        throw Error(ErrorKind::BadInput,
                    "floor coefficient leaves no free mass at w = " +
                        std::to_string(w));
      p = sample_floor_simplex(d, floor, rng);
    }

    const std::uint64_t seed1 = mix64(config.seed + 2 * i);
    const std::uint64_t seed2 = mix64(config.seed + 2 * i + 1);
    const MeanSe kl =
        condition1_estimate(p, w, config.trials, seed1, config.threads);
    const MeanSe m2 =
        condition2_estimate(p, w, config.trials, seed2, config.threads);

    AuditRow row;
    row.w = w;
    row.d = d;
    row.kl_mean = kl.mean;
    row.kl_se = kl.se;
    row.m2_mean = m2.mean;
    row.m2_se = m2.se;
    row.kl_bound = 1.5 * static_cast<double>(d) / static_cast<double>(w);
    row.m2_bound = 2.0 * static_cast<double>(d) / static_cast<double>(w);
    double p_min = 1.0;
    for (double v : p.probs) p_min = std::min(p_min, v);
    row.p_min = p_min;
    row.floor_ok = p_min + 1e-15 >= 1.0 / std::sqrt(static_cast<double>(w));
    report.rows.push_back(row);
  }

  if (report.rows.size() >= 3) {
    std::vector<int> ws;
    std::vector<double> kl_means, kl_ses, m2_means, m2_ses;
    bool positive = true;
    for (const AuditRow& r : report.rows) {
      ws.push_back(r.w);
      kl_means.push_back(r.kl_mean);
      kl_ses.push_back(r.kl_se);
      m2_means.push_back(r.m2_mean);
      m2_ses.push_back(r.m2_se);
      if (r.kl_mean <= 0.0 || r.m2_mean <= 0.0) positive = false;
    }
    if (positive) {
      const DecayFit fit1 = fit_decay(ws, kl_means, kl_ses);
      const DecayFit fit2 = fit_decay(ws, m2_means, m2_ses);
      report.beta1 = fit1.exponent;
      report.beta1_se = fit1.se;
      report.beta2 = fit2.exponent;
      report.beta2_se = fit2.se;
      report.fit_performed = true;
    }
  }
  return report;
}

}  // namespace quqcd
