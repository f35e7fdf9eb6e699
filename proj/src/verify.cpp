#include "radet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "radet/autodiff.hpp"
#include "radet/cfar.hpp"
#include "radet/classical.hpp"
#include "radet/dsvdd.hpp"
#include "radet/error.hpp"
#include "radet/oracles.hpp"
#include "radet/parallel.hpp"
#include "radet/svdd.hpp"

namespace radet {

namespace {

CheckResult upper_bound(std::string name, double value, double tol, std::string detail = {}) {
  return {std::move(name), value, tol, std::isfinite(value) && value <= tol, std::move(detail)};
}

// H0 draws of the configured family, statistic evaluated at round-robin bins.
std::vector<double> null_statistics(const Scenario& scn, std::size_t n, std::uint64_t tag, bool normalized) {
  const SceneGenerator gen(scn);
  const CholeskyFactor sigma(scn.total_covariance());
  std::vector<ComplexVector> steering;
  for (std::size_t d = 0; d < scn.m; ++d) steering.push_back(steering_vector(static_cast<int>(d), scn.m));
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) {
    RandomStream rs = gen.stream(SplitTag::adhoc, tag * 1000003 + i);
    const Sample s = gen.interference(rs, 0);
    const auto& p = steering[i % scn.m];
    out[i] = normalized ? nmf_statistic(s.cell, sigma, p) : mf_statistic(s.cell, sigma, p);
  });
  return out;
}

std::vector<CheckResult> null_checks(const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  const std::size_t n = opt.monte_carlo;
  const double crit = 0.01;
  const double pfa = opt.scenario.pfa;
  const double tail_tol = 0.003;

  Scenario gauss = opt.scenario;
  gauss.family = ClutterFamily::gaussian;
  gauss.master_seed = opt.seed;
  const auto mf = null_statistics(gauss, n, 1, false);
  out.push_back(upper_bound("mf_null_exp1_ks", oracle::ks_distance(mf, oracle::exp1_cdf), crit,
                            "Gaussian H0, true covariance"));
  const double lambda_mf = -std::log(pfa);
  out.push_back(upper_bound("mf_null_tail_at_-ln(pfa)", std::abs(exceedance_fraction(mf, lambda_mf) - pfa), tail_tol));

  // Beta(1, m-1) needs interference that is a scalar times a fixed
  // covariance: Gaussian, or compound-Gaussian without thermal noise.
  const double b = static_cast<double>(gauss.m) - 1.0;
  const auto beta_cdf = [b](double x) { return oracle::beta1_cdf(x, b); };
  const double lambda_nmf = 1.0 - std::pow(pfa, 1.0 / b);
  const auto nmf = null_statistics(gauss, n, 2, true);
  out.push_back(upper_bound("nmf_null_beta_ks", oracle::ks_distance(nmf, beta_cdf), crit, "Gaussian H0, Beta(1, m-1)"));
  out.push_back(upper_bound("nmf_null_tail", std::abs(exceedance_fraction(nmf, lambda_nmf) - pfa), tail_tol));

  Scenario compound = opt.scenario;
  compound.family = ClutterFamily::compound_gaussian;
  compound.master_seed = opt.seed;
  compound.noise_power = 0.0;
  const auto nmf_c = null_statistics(compound, n, 3, true);
  out.push_back(upper_bound("nmf_texture_invariance_ks", oracle::ks_distance(nmf_c, beta_cdf), crit,
                            "compound-Gaussian H0, no thermal noise"));

  // order-statistic threshold against the Exp(1) quantile
  const double thr = calibrate_threshold(mf, pfa);
  const double quantile_se = std::sqrt(pfa * (1.0 - pfa) / static_cast<double>(n)) / pfa;
  out.push_back(upper_bound("threshold_vs_exp1_quantile", std::abs(thr - lambda_mf), 4.0 * quantile_se));
  return out;
}

std::vector<CheckResult> tyler_checks(const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  Scenario scn = opt.scenario;
  scn.family = ClutterFamily::compound_gaussian;
  scn.master_seed = opt.seed;
  const SceneGenerator gen(scn);
  TylerOptions topt;
  if (opt.faults.count("tyler")) topt.denominator_offset = 1e-3;

  double worst_scale = 0.0, worst_trace = 0.0, worst_fp = 0.0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    RandomStream rs = gen.stream(SplitTag::adhoc, 5000000 + static_cast<std::uint64_t>(t));
    const Sample s = gen.interference(rs, scn.k_secondary);
    const TylerResult base = tyler_fit(s.secondary, topt);
    std::vector<ComplexVector> scaled = s.secondary;
    for (auto& z : scaled) z *= cdouble(std::pow(10.0, 2.0 * rs.uniform() - 1.0), 0.0);
    const TylerResult other = tyler_fit(scaled, topt);
    worst_scale = std::max(worst_scale, relative_frobenius_error(other.estimate.matrix, base.estimate.matrix));
    worst_trace = std::max(worst_trace, std::abs(base.estimate.matrix.trace() - static_cast<double>(scn.m)));
    worst_fp = std::max(worst_fp, tyler_fixed_point_residual(s.secondary, base.estimate.matrix));
  }
  const std::string note = opt.faults.count("tyler") ? "FAULT INJECTED" : "";
  out.push_back(upper_bound("tyler_scale_invariance", worst_scale, 1e-9, note));
  out.push_back(upper_bound("tyler_trace_equals_m", worst_trace, 1e-9, note));
  out.push_back(upper_bound("tyler_fixed_point_residual", worst_fp, 1e-8, note));
  return out;
}

std::vector<CheckResult> svdd_checks(const VerifyOptions& opt) {
  Scenario scn = opt.scenario;
  scn.master_seed = opt.seed;
  const SceneGenerator gen(scn);
  double worst_gap = 0.0, worst_alpha = 0.0;
  const std::size_t sizes[] = {20, 35, 50};
  const double nus[] = {0.1, 0.25, 0.5};
  std::uint64_t idx = 6000000;
  for (std::size_t n : sizes) {
    for (double nu : nus) {
      std::vector<ComplexVector> pts;
      for (std::size_t i = 0; i < n; ++i) {
        RandomStream rs = gen.stream(SplitTag::adhoc, idx++);
        pts.push_back(gen.interference(rs, 0).cell);
      }
      const GramMatrix gram = GramMatrix::rbf(pts, kernel_width(pts));
      const DualSolution sol = solve_dual(gram, nu, {1e-10, 1000000});
      std::vector<double> k(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) k[i * n + j] = gram(i, j);
      const auto ref = oracle::svdd_dual_projected_gradient(k, n, 1.0 / (nu * static_cast<double>(n)));
      worst_gap = std::max(worst_gap, std::abs(sol.objective - ref.objective) / std::max(1.0, std::abs(ref.objective)));
      double da = 0.0;
      for (std::size_t i = 0; i < n; ++i) da = std::max(da, std::abs(sol.alphas[i] - ref.alphas[i]));
      worst_alpha = std::max(worst_alpha, da);
    }
  }
  return {upper_bound("svdd_dual_objective_vs_oracle", worst_gap, 1e-8),
          upper_bound("svdd_dual_alphas_vs_oracle", worst_alpha, 1e-4)};
}

// Scalar loss ||op(inputs) - c||^2 so every output entry contributes.
using Op = std::function<ad::Tensor(const std::vector<ad::Tensor>&)>;

double gradcheck(const std::vector<std::pair<ad::Shape, std::vector<double>>>& inputs, const Op& op,
                 std::uint64_t seed) {
  auto build = [&](const std::vector<std::vector<double>>& values, bool grad) {
    std::vector<ad::Tensor> t;
    for (std::size_t k = 0; k < inputs.size(); ++k) t.push_back(ad::Tensor::from(inputs[k].first, values[k], grad));
    return t;
  };
  std::vector<std::vector<double>> values;
  for (const auto& in : inputs) values.push_back(in.second);

  const ad::Tensor probe = op(build(values, false));
  RandomStream rs(mix64(seed), 0);
  std::vector<double> center(probe.size());
  for (double& c : center) c = rs.normal();
  auto loss_of = [&](const std::vector<ad::Tensor>& t) {
    ad::Tensor out = op(t);
    return ad::mean_squared_distance(ad::reshape(out, {1, out.size()}), center);
  };

  auto leaves = build(values, true);
  loss_of(leaves).backward();
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const auto numeric = oracle::numeric_gradient(
        [&](std::span<const double> x) {
          auto v = values;
          v[k].assign(x.begin(), x.end());
          return loss_of(build(v, false)).item();
        },
        values[k]);
    worst = std::max(worst, oracle::max_relative_error(leaves[k].grad(), numeric));
  }
  return worst;
}

std::vector<double> random_values(std::size_t n, RandomStream& rs) {
  std::vector<double> v(n);
  for (double& x : v) x = rs.normal();
  return v;
}

std::vector<CheckResult> gradient_checks(const VerifyOptions& opt) {
  RandomStream rs(mix64(opt.seed), stream_id(99, 0));
  const double tol = 1e-5;
  std::vector<CheckResult> out;
  const ad::Shape xs{3, 2, 8};
  out.push_back(upper_bound(
      "gradcheck_conv1d",
      gradcheck({{xs, random_values(48, rs)}, {{4, 2, 3}, random_values(24, rs)}},
                [](const auto& t) { return ad::conv1d(t[0], t[1], 1, 1); }, 1),
      tol));
  out.push_back(upper_bound(
      "gradcheck_conv1d_stride2",
      gradcheck({{xs, random_values(48, rs)}, {{3, 2, 3}, random_values(18, rs)}},
                [](const auto& t) { return ad::conv1d(t[0], t[1], 2, 0); }, 2),
      tol));
  out.push_back(upper_bound(
      "gradcheck_batch_norm_train",
      gradcheck({{xs, random_values(48, rs)}, {{2}, {0.7, 1.3}}},
                [](const auto& t) {
                  ad::BatchNormState st{{0.0, 0.0}, {1.0, 1.0}, 0.1, 1e-5};
                  return ad::batch_norm(t[0], t[1], st, true);
                },
                3),
      tol));
  out.push_back(upper_bound(
      "gradcheck_batch_norm_eval",
      gradcheck({{xs, random_values(48, rs)}, {{2}, {0.7, 1.3}}},
                [](const auto& t) {
                  const ad::BatchNormState st{{0.2, -0.1}, {1.5, 0.6}, 0.1, 1e-5};
                  return ad::batch_norm_eval(t[0], t[1], st);
                },
                4),
      tol));
  out.push_back(upper_bound("gradcheck_leaky_relu",
                            gradcheck({{xs, random_values(48, rs)}},
                                      [](const auto& t) { return ad::leaky_relu(t[0], 0.01); }, 5),
                            tol));
  out.push_back(upper_bound("gradcheck_max_pool",
                            gradcheck({{xs, random_values(48, rs)}},
                                      [](const auto& t) { return ad::max_pool1d(t[0], 2, 2); }, 6),
                            tol));
  out.push_back(upper_bound("gradcheck_adaptive_avg_pool",
                            gradcheck({{{3, 2, 7}, random_values(42, rs)}},
                                      [](const auto& t) { return ad::adaptive_avg_pool1d(t[0], 3); }, 7),
                            tol));
  out.push_back(upper_bound(
      "gradcheck_linear",
      gradcheck({{{3, 5}, random_values(15, rs)}, {{4, 5}, random_values(20, rs)}},
                [](const auto& t) { return ad::linear(t[0], t[1]); }, 8),
      tol));

  // whole network loss with respect to every parameter
  NetworkSpec spec;
  spec.channels = {4, 6};
  spec.rep_dim = 5;
  Network net = Network::initialize(spec, opt.seed);
  const ad::Tensor batch = ad::Tensor::from({4, 2, 8}, random_values(64, rs));
  std::vector<double> center(spec.rep_dim);
  for (double& c : center) c = 0.3 * rs.normal();
  const double beta = 1e-3;
  auto params = net.parameters();
  for (auto& p : params) p.zero_grad();
  dsvdd_loss(net, batch, center, beta, true).backward();
  double worst = 0.0;
  for (auto& p : params) {
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    const std::vector<double> x0(p.value().begin(), p.value().end());
    const auto numeric = oracle::numeric_gradient(
        [&](std::span<const double> x) {
          std::copy(x.begin(), x.end(), p.value().begin());
          return dsvdd_loss(net, batch, center, beta, true).item();
        },
        x0, 1e-5);
    std::copy(x0.begin(), x0.end(), p.value().begin());
    worst = std::max(worst, oracle::max_relative_error(analytic, numeric));
  }
  out.push_back(upper_bound("gradcheck_dsvdd_loss", worst, tol, "all parameters, training mode"));
  return out;
}

}  // namespace

std::vector<CheckResult> run_oracle_suite(const VerifyOptions& options) {
  for (const auto& f : options.faults) {
    if (f != "tyler") fail(ErrorKind::validation, "unknown fault '" + f + "' (known: tyler)");
  }
  options.scenario.validate();
  std::vector<CheckResult> all;
  for (auto&& part : {null_checks(options), tyler_checks(options), svdd_checks(options), gradient_checks(options)}) {
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

std::string format_checks(const std::vector<CheckResult>& checks) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %-12s %-12s %-6s %s\n", "check", "value", "tolerance", "result", "note");
  os << line;
  std::size_t failed = 0;
  for (const auto& c : checks) {
    if (!c.passed) ++failed;
    std::snprintf(line, sizeof line, "%-32s %-12.4e %-12.4e %-6s %s\n", c.name.c_str(), c.value, c.tolerance,
                  c.passed ? "PASS" : "FAIL", c.detail.c_str());
    os << line;
  }
  os << (checks.size() - failed) << "/" << checks.size() << " checks passed\n";
  return os.str();
}

}  // namespace radet
