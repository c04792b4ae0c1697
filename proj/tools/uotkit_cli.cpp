// uotkit command line: data generation, solvers, sweeps and certificates.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "uotkit/barycenter.hpp"
#include "uotkit/certify.hpp"
#include "uotkit/fw.hpp"
#include "uotkit/gen.hpp"
#include "uotkit/io.hpp"
#include "uotkit/ot1d.hpp"
#include "uotkit/sinkhorn.hpp"

namespace {

using namespace uot;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBudget = 2;

struct RunContext {
  std::vector<std::string> argv;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();
};

RunContext g_ctx;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("uotkit");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("UOTKIT_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else if (level == "info") spdlog::set_level(spdlog::level::info);
  else spdlog::set_level(spdlog::level::err);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("bad number in list: " + tok);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

Entropy make_entropy(const std::string& kind, double rho) {
  if (kind == "kl") return Entropy::kl(rho);
  if (kind == "berg") return Entropy::berg(rho);
  if (kind == "balanced") return Entropy::balanced();
  throw std::invalid_argument("unknown entropy " + kind);
}

// Data goes to `path` (stdout when empty); a sidecar <path>.meta.json keeps
// the wall-clock facts so reruns give byte-identical data files.
void emit(const std::string& path, const std::string& content, const std::string& command) {
  if (path.empty()) {
    std::cout << content;
    std::cout.flush();
    return;
  }
  io::write_text_file(path, content);
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(g_ctx.started);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  nlohmann::ordered_json meta;
  meta["command"] = command;
  meta["argv"] = g_ctx.argv;
  meta["started_utc"] = stamp;
  meta["elapsed_seconds"] = std::chrono::duration<double>(now - g_ctx.started).count();
  io::write_text_file(path + ".meta.json", meta.dump(2) + "\n");
}

// ---------------------------------------------------------------- gen

struct GenOpts {
  std::string kind = "mixture";
  int n = 500;
  std::uint64_t seed = 0;
  MixtureParams mix;
  double lo = 0.0, hi = 1.0, mass = 1.0;
  std::string out;
};

int run_gen(const GenOpts& o) {
  std::ostringstream ss;
  if (o.kind == "mixture") {
    const MixtureSample s = sample_mixture(o.n, o.seed, o.mix);
    std::ostringstream meta;
    meta << "kind=mixture n=" << o.n << " seed=" << o.seed
         << " sigma=" << io::format_double(o.mix.sigma) << " mu1=" << io::format_double(s.mu1)
         << " mu2=" << io::format_double(s.mu2) << " a=" << io::format_double(s.a)
         << " b=" << io::format_double(s.b);
    io::write_measure_csv(ss, s.measure, {meta.str()});
  } else if (o.kind == "uniform") {
    const DiscreteMeasure m = sample_uniform(o.n, o.seed, o.lo, o.hi, o.mass);
    std::ostringstream meta;
    meta << "kind=uniform n=" << o.n << " seed=" << o.seed << " lo=" << io::format_double(o.lo)
         << " hi=" << io::format_double(o.hi) << " mass=" << io::format_double(o.mass);
    io::write_measure_csv(ss, m, {meta.str()});
  } else {
    throw std::invalid_argument("unknown kind " + o.kind);
  }
  emit(o.out, ss.str(), "gen");
  return kExitOk;
}

// ---------------------------------------------------------------- sinkhorn

struct PairOpts {
  std::string alpha, beta;
  std::string entropy = "kl";
  double rho = 1.0;
  std::optional<double> rho1, rho2;
  double p = 2.0;

  Entropy ent1() const { return make_entropy(entropy, rho1.value_or(rho)); }
  Entropy ent2() const { return make_entropy(entropy, rho2.value_or(rho)); }
  UotProblem problem(double eps) const {
    return UotProblem(io::read_measure(alpha), io::read_measure(beta), PowerCost{p}, ent1(),
                      ent2(), eps);
  }
};

struct SinkhornOpts {
  PairOpts pair;
  std::string variant = "f";
  double eps = 0.1;
  double tol = 1e-9;
  int max_iters = 100000;
  bool anderson = false;
  int anderson_depth = 4;
  double anderson_reg = 1e-7;
  std::string ref, out, potentials;
  bool no_timing = false;
};

SinkhornVariant parse_variant(const std::string& v) {
  if (v == "f") return SinkhornVariant::F;
  if (v == "g") return SinkhornVariant::G;
  if (v == "h") return SinkhornVariant::H;
  throw std::invalid_argument("unknown variant " + v);
}

int run_sinkhorn_cmd(const SinkhornOpts& o) {
  const SinkhornVariant variant = parse_variant(o.variant);
  if (variant == SinkhornVariant::H && o.pair.entropy != "kl")
    throw std::invalid_argument("h-sinkhorn requires kl entropies");
  const UotProblem prob = o.pair.problem(o.eps);
  SinkhornConfig cfg;
  cfg.variant = variant;
  cfg.tol = o.tol;
  cfg.max_iters = o.max_iters;
  if (o.anderson) cfg.anderson = AndersonConfig{o.anderson_depth, o.anderson_reg};
  std::optional<DualPair> ref;
  if (!o.ref.empty()) ref = io::read_potentials(o.ref);

  spdlog::info("sinkhorn variant={} eps={} N={} M={}", o.variant, o.eps, prob.alpha().size(),
               prob.beta().size());
  const SolverReport rep =
      run_sinkhorn(prob, cfg, DualPair::zeros(prob.alpha().size(), prob.beta().size()), ref);
  spdlog::info("iterations={} converged={}", rep.iterations, rep.converged);

  std::ostringstream trace;
  io::write_sinkhorn_trace(trace, rep.trace, !o.no_timing);
  emit(o.out, trace.str(), "sinkhorn");
  if (!o.potentials.empty()) {
    std::ostringstream pot;
    io::write_potentials(pot, rep.final);
    io::write_text_file(o.potentials, pot.str());
  }
  return rep.converged ? kExitOk : kExitBudget;
}

// ---------------------------------------------------------------- rates

struct RatesOpts {
  PairOpts pair;
  double eps = 0.05;
  std::string rho_grid = "0.1,0.5,1,5";
  std::string variants = "f,g,h";
  int jobs = 1;
  int max_iters = 100000;
  std::string out;
};

std::string rate_row(const RatesOpts& o, const DiscreteMeasure& a, const DiscreteMeasure& b,
                     double rho, const std::vector<std::string>& variants) {
  const UotProblem prob(a, b, PowerCost{o.pair.p}, Entropy::kl(rho), Entropy::kl(rho), o.eps);
  const DualPair zero = DualPair::zeros(a.size(), b.size());
  SinkhornConfig warm;
  warm.variant = SinkhornVariant::H;
  warm.tol = 1e-13;
  warm.max_iters = o.max_iters;
  SinkhornConfig polish;
  polish.variant = SinkhornVariant::F;
  polish.tol = 1e-12;
  polish.max_iters = o.max_iters;
  const DualPair star = run_sinkhorn(prob, polish, run_sinkhorn(prob, warm, zero).final).final;

  std::string row = io::format_double(rho);
  for (const char* v : {"f", "g", "h"}) {
    row += ',';
    if (std::find(variants.begin(), variants.end(), v) == variants.end()) continue;
    try {
      SinkhornConfig cfg;
      cfg.variant = parse_variant(v);
      cfg.tol = 1e-14;
      cfg.max_iters = o.max_iters;
      const SolverReport rep = run_sinkhorn(prob, cfg, zero, star);
      std::vector<double> errs;
      for (const auto& r : rep.trace) errs.push_back(*r.err_f);
      row += io::format_double(estimate_rate(errs));
    } catch (const std::exception& e) {
      spdlog::warn("rho={} variant={}: {}", rho, v, e.what());
      row += "error";
    }
  }
  return row;
}

int run_rates(const RatesOpts& o) {
  const std::vector<double> grid = parse_list(o.rho_grid);
  const std::vector<std::string> variants = split_words(o.variants);
  for (const auto& v : variants) parse_variant(v);
  if (o.jobs < 1) throw std::invalid_argument("--jobs must be >= 1");
  const DiscreteMeasure a = io::read_measure(o.pair.alpha);
  const DiscreteMeasure b = io::read_measure(o.pair.beta);

  std::vector<std::string> rows(grid.size());
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&]() {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= grid.size()) return;
        k = next++;
      }
      try {
        rows[k] = rate_row(o, a, b, grid[k], variants);
      } catch (const std::exception& e) {
        spdlog::warn("rho={}: {}", grid[k], e.what());
        rows[k] = io::format_double(grid[k]) + ",error,error,error";
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(o.jobs, static_cast<int>(grid.size()));
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::string out = "rho,kappa_f,kappa_g,kappa_h\n";
  for (const auto& r : rows) out += r + "\n";
  emit(o.out, out, "rates");
  return kExitOk;
}

// ---------------------------------------------------------------- uot1d

struct Uot1dOpts {
  PairOpts pair;
  std::string method = "fw-ls";
  double gap_tol = 1e-6;
  int max_iters = 5000;
  std::string out, cert, plan, potentials;
  bool no_timing = false;
};

FwStep parse_method(const std::string& m) {
  if (m == "fw") return FwStep::Harmonic;
  if (m == "fw-ls") return FwStep::LineSearch;
  if (m == "pfw") return FwStep::Pairwise;
  throw std::invalid_argument("unknown method " + m);
}

int run_uot1d(const Uot1dOpts& o) {
  const UotProblem prob = o.pair.problem(0.0);
  FwConfig cfg;
  cfg.step = parse_method(o.method);
  cfg.gap_tol = o.gap_tol;
  cfg.max_iters = o.max_iters;
  const FwResult res = fw_solve(prob, cfg);
  const double ms = res.report.trace.empty()
                        ? 0.0
                        : static_cast<double>(res.report.trace.back().wall_ns) * 1e-6;
  spdlog::info("method={} iterations={} wall_ms={:.3f} gap={}", o.method, res.report.iterations,
               ms, res.certificate.gap);

  std::ostringstream trace;
  io::write_gap_trace(trace, res.report.trace, !o.no_timing);
  if (!o.out.empty()) emit(o.out, trace.str(), "uot1d");
  const std::string cert = to_json(res.certificate) + "\n";
  if (!o.cert.empty()) io::write_text_file(o.cert, cert);
  std::cout << cert;
  if (!o.plan.empty()) {
    std::ostringstream ss;
    io::write_plan_csv(ss, res.plan);
    io::write_text_file(o.plan, ss.str());
  }
  if (!o.potentials.empty()) {
    std::ostringstream ss;
    io::write_potentials(ss, res.report.final);
    io::write_text_file(o.potentials, ss.str());
  }
  if (res.certificate.passed) return kExitOk;
  return res.report.converged ? kExitError : kExitBudget;
}

// ---------------------------------------------------------------- barycenter

struct BaryOpts {
  std::vector<std::string> inputs;
  std::string weights;
  double rho = 1.0;
  bool balanced = false;
  std::string method = "fw-ls";
  double gap_tol = 1e-6;
  int max_iters = 5000;
  std::string out, cert, plan, trace;
  bool no_timing = false;
};

int run_barycenter(const BaryOpts& o) {
  BarycenterProblem prob;
  for (const auto& path : o.inputs) prob.inputs.push_back(io::read_measure(path));
  const auto K = static_cast<Eigen::Index>(prob.inputs.size());
  if (o.weights.empty()) {
    prob.omega = Vector::Constant(K, 1.0 / static_cast<double>(K));
  } else {
    const auto w = parse_list(o.weights);
    prob.omega = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
  }
  prob.rho = o.rho;
  prob.balanced = o.balanced;
  FwConfig cfg;
  cfg.step = parse_method(o.method);
  cfg.gap_tol = o.gap_tol;
  cfg.max_iters = o.max_iters;
  const BarycenterResult res = fw_barycenter(prob, cfg);
  spdlog::info("barycenter K={} iterations={} gap={}", K, res.iterations, res.certificate.gap);

  std::ostringstream bar;
  io::write_measure_csv(bar, res.barycenter);
  emit(o.out, bar.str(), "barycenter");
  const std::string cert = to_json(res.certificate) + "\n";
  if (!o.cert.empty()) io::write_text_file(o.cert, cert);
  if (!o.out.empty()) std::cout << cert;
  if (!o.plan.empty()) {
    std::ostringstream ss;
    io::write_multiplan_csv(ss, res.plan, prob.inputs.size());
    io::write_text_file(o.plan, ss.str());
  }
  if (!o.trace.empty()) {
    std::ostringstream ss;
    io::write_gap_trace(ss, res.trace, !o.no_timing);
    io::write_text_file(o.trace, ss.str());
  }
  if (res.certificate.passed) return kExitOk;
  return res.converged ? kExitError : kExitBudget;
}

// ---------------------------------------------------------------- certify

struct CertifyOpts {
  PairOpts pair;
  std::string potentials;
  double eps = 0.0;
  double tol = 1e-6;
  std::string out;
};

int run_certify(const CertifyOpts& o) {
  const UotProblem prob = o.pair.problem(o.eps);
  const DualPair d = io::read_potentials(o.potentials);
  if (d.f.size() != prob.alpha().size() || d.g.size() != prob.beta().size())
    throw std::invalid_argument("potentials do not match the measures");

  Certificate cert;
  if (o.eps == 0.0) {
    const double viol = std::max(0.0, max_constraint_violation(prob.C(), d.f, d.g));
    const double lam = lambda_star(prob, d);
    const auto [at, bt] = updated_marginals(prob, d, lam);
    const Ot1dResult lmo = solve_ot_1d(at, bt, prob.C());
    cert = assemble_certificate(eval_primal(prob, lmo.plan), eval_H(prob, d), viol, o.tol);
    try {
      const ScalarMax gs = scalar_max_oracle(
          [&](double l) { return eval_G(prob, d, l); }, lam - 1.0, lam + 1.0, 1e-10);
      spdlog::info("lambda*={} golden-section={}", lam, gs.argmax);
    } catch (const std::exception& e) {
      spdlog::info("lambda* oracle skipped: {}", e.what());
    }
  } else {
    Matrix plan(prob.C().rows(), prob.C().cols());
    const Vector& a = prob.alpha().weights();
    const Vector& b = prob.beta().weights();
    for (Eigen::Index i = 0; i < plan.rows(); ++i)
      for (Eigen::Index j = 0; j < plan.cols(); ++j)
        plan(i, j) = a[i] * b[j] * std::exp((d.f[i] + d.g[j] - prob.C()(i, j)) / o.eps);
    cert = assemble_certificate(eval_primal(prob, plan), eval_F(prob, d), 0.0, o.tol);
  }
  const std::string js = to_json(cert) + "\n";
  if (!o.out.empty()) emit(o.out, js, "certify");
  std::cout << js;
  if (!cert.passed) {
    std::fprintf(stderr, "error: certificate failed (gap %g)\n", cert.gap);
    return kExitError;
  }
  return kExitOk;
}

void add_pair_options(CLI::App* cmd, PairOpts& p) {
  cmd->add_option("alpha", p.alpha, "first measure (csv or json)")->required();
  cmd->add_option("beta", p.beta, "second measure (csv or json)")->required();
  cmd->add_option("--entropy", p.entropy, "kl | berg | balanced")
      ->check(CLI::IsMember({"kl", "berg", "balanced"}));
  cmd->add_option("--rho", p.rho, "marginal penalty strength for both sides");
  cmd->add_option("--rho1", p.rho1, "penalty on the first marginal");
  cmd->add_option("--rho2", p.rho2, "penalty on the second marginal");
  cmd->add_option("--p", p.p, "cost exponent, c = |x - y|^p");
}

}  // namespace

int main(int argc, char** argv) {
  g_ctx.argv.assign(argv, argv + argc);
  setup_logging();

  CLI::App app{"uotkit: translation-invariant unbalanced optimal transport"};
  app.require_subcommand(1);

  GenOpts gen;
  auto* c_gen = app.add_subcommand("gen", "sample a synthetic 1-D measure");
  c_gen->add_option("--kind", gen.kind, "mixture | uniform")
      ->check(CLI::IsMember({"mixture", "uniform"}));
  c_gen->add_option("--n", gen.n, "number of atoms")->check(CLI::PositiveNumber);
  c_gen->add_option("--seed", gen.seed, "rng seed");
  c_gen->add_option("--sigma", gen.mix.sigma, "mixture component width");
  c_gen->add_option("--mu1-lo", gen.mix.mu1_lo);
  c_gen->add_option("--mu1-hi", gen.mix.mu1_hi);
  c_gen->add_option("--mu2-lo", gen.mix.mu2_lo);
  c_gen->add_option("--mu2-hi", gen.mix.mu2_hi);
  c_gen->add_option("--ab-lo", gen.mix.ab_lo, "lower bound of the component amplitudes");
  c_gen->add_option("--ab-hi", gen.mix.ab_hi, "upper bound of the component amplitudes");
  c_gen->add_option("--lo", gen.lo, "uniform: support lower bound");
  c_gen->add_option("--hi", gen.hi, "uniform: support upper bound");
  c_gen->add_option("--mass", gen.mass, "uniform: total mass");
  c_gen->add_option("--out", gen.out, "output csv (default stdout)");

  SinkhornOpts sk;
  auto* c_sk = app.add_subcommand("sinkhorn", "run F-, G- or H-Sinkhorn and write the trace");
  add_pair_options(c_sk, sk.pair);
  c_sk->add_option("--variant", sk.variant, "f | g | h")->check(CLI::IsMember({"f", "g", "h"}));
  c_sk->add_option("--eps", sk.eps, "entropic regularization")->check(CLI::PositiveNumber);
  c_sk->add_option("--tol", sk.tol, "stop when the translated f moves less than this");
  c_sk->add_option("--max-iters", sk.max_iters);
  c_sk->add_flag("--anderson", sk.anderson, "Anderson acceleration");
  c_sk->add_option("--anderson-depth", sk.anderson_depth);
  c_sk->add_option("--anderson-reg", sk.anderson_reg);
  c_sk->add_option("--ref", sk.ref, "reference potentials json for error columns");
  c_sk->add_option("--out", sk.out, "trace csv (default stdout)");
  c_sk->add_option("--potentials", sk.potentials, "write final potentials json");
  c_sk->add_flag("--no-timing", sk.no_timing, "leave the wall_ns column empty");

  RatesOpts rt;
  auto* c_rt = app.add_subcommand("rates", "contraction rates of F/G/H-Sinkhorn over a rho grid");
  add_pair_options(c_rt, rt.pair);
  c_rt->add_option("--eps", rt.eps)->check(CLI::PositiveNumber);
  c_rt->add_option("--rho-grid", rt.rho_grid, "comma separated rho values");
  c_rt->add_option("--variants", rt.variants, "subset of f,g,h");
  c_rt->add_option("--jobs", rt.jobs, "concurrent rows");
  c_rt->add_option("--max-iters", rt.max_iters);
  c_rt->add_option("--out", rt.out, "csv (default stdout)");

  Uot1dOpts u1;
  auto* c_u1 = app.add_subcommand("uot1d", "unregularized 1-D UOT by Frank-Wolfe");
  add_pair_options(c_u1, u1.pair);
  c_u1->add_option("--method", u1.method, "fw | fw-ls | pfw")
      ->check(CLI::IsMember({"fw", "fw-ls", "pfw"}));
  c_u1->add_option("--gap-tol", u1.gap_tol)->check(CLI::PositiveNumber);
  c_u1->add_option("--max-iters", u1.max_iters);
  c_u1->add_option("--out", u1.out, "gap trace csv");
  c_u1->add_option("--cert", u1.cert, "certificate json");
  c_u1->add_option("--plan", u1.plan, "plan csv");
  c_u1->add_option("--potentials", u1.potentials, "final potentials json");
  c_u1->add_flag("--no-timing", u1.no_timing, "leave the wall_ns column empty");

  BaryOpts by;
  auto* c_by = app.add_subcommand("barycenter", "1-D UOT barycenter of K measures");
  c_by->add_option("inputs", by.inputs, "K >= 2 measure files")->required()->expected(2, -1);
  c_by->add_option("--weights", by.weights, "comma separated, sums to 1 (default uniform)");
  c_by->add_option("--rho", by.rho);
  c_by->add_flag("--balanced", by.balanced, "hard marginal constraints");
  c_by->add_option("--method", by.method, "fw | fw-ls")->check(CLI::IsMember({"fw", "fw-ls"}));
  c_by->add_option("--gap-tol", by.gap_tol)->check(CLI::PositiveNumber);
  c_by->add_option("--max-iters", by.max_iters);
  c_by->add_option("--out", by.out, "barycenter csv (default stdout)");
  c_by->add_option("--cert", by.cert, "certificate json");
  c_by->add_option("--plan", by.plan, "multimarginal plan csv");
  c_by->add_option("--trace", by.trace, "gap trace csv");
  c_by->add_flag("--no-timing", by.no_timing, "leave the wall_ns column empty");

  CertifyOpts ct;
  auto* c_ct = app.add_subcommand("certify", "duality-gap certificate for given potentials");
  add_pair_options(c_ct, ct.pair);
  c_ct->add_option("--potentials", ct.potentials, "potentials json {f, g}")->required();
  c_ct->add_option("--eps", ct.eps)->check(CLI::NonNegativeNumber);
  c_ct->add_option("--tol", ct.tol)->check(CLI::PositiveNumber);
  c_ct->add_option("--out", ct.out, "certificate json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*c_gen) return run_gen(gen);
    if (*c_sk) return run_sinkhorn_cmd(sk);
    if (*c_rt) return run_rates(rt);
    if (*c_u1) return run_uot1d(u1);
    if (*c_by) return run_barycenter(by);
    if (*c_ct) return run_certify(ct);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
