// gtps command-line driver: toy-model closed forms, integrability and
// disorder sweeps, A-OTOC probes, and the numerical verification suite.

#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "gtps/serdes.hpp"
#include "gtps/verify.hpp"

using namespace gtps;

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (j.value("schema_version", -1) != kSchemaVersion)
    throw std::invalid_argument("config: schema_version must be " +
                                std::to_string(kSchemaVersion));
  return j;
}

std::string sidecar_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension(".json");
  return p.string();
}

std::vector<double> dvec(const json& j, const char* key, std::size_t n) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("config: missing '") + key + "'");
  std::vector<double> v;
  try {
    v = j.at(key).get<std::vector<double>>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("config: '") + key + "' must be a number array");
  }
  if (n != 0 && v.size() != n)
    throw std::invalid_argument(std::string("config: '") + key + "' has the wrong length");
  return v;
}

struct ToyInput {
  ToyParams p;
  std::vector<double> deps, dj;
};

ToyInput parse_toy(const json& cfg, int max_sites) {
  require_known_keys(cfg, {"schema_version", "seed", "eps", "j", "deps", "dj"}, "config");
  ToyInput in;
  in.p.eps = dvec(cfg, "eps", 0);
  in.p.j = dvec(cfg, "j", in.p.eps.size());
  in.deps = dvec(cfg, "deps", in.p.eps.size());
  in.dj = dvec(cfg, "dj", in.p.eps.size());
  in.p.validate();
  if (static_cast<int>(in.p.eps.size()) > max_sites)
    throw std::invalid_argument("config: too many sites for this command");
  return in;
}

// finite-difference angle differentials along (deps, dj), branch-unwrapped
std::vector<double> fd_dtheta(const ToyParams& p, const std::vector<double>& deps,
                              const std::vector<double>& dj, double s = 1e-4) {
  ToyParams pp = p, pm = p;
  for (std::size_t i = 0; i < p.eps.size(); ++i) {
    pp.eps[i] += s * deps[i];
    pp.j[i] += s * dj[i];
    pm.eps[i] -= s * deps[i];
    pm.j[i] -= s * dj[i];
  }
  const auto base = theta_min_closed(p);
  const auto tp = unwrap_angles(base, theta_min_closed(pp));
  const auto tm = unwrap_angles(base, theta_min_closed(pm));
  std::vector<double> dtheta(p.eps.size());
  for (std::size_t i = 0; i < p.eps.size(); ++i) dtheta[i] = (tp[i] - tm[i]) / (2 * s);
  return dtheta;
}

int cmd_toy_abelian(const json& cfg, const std::string& out, std::uint64_t seed) {
  const ToyInput in = parse_toy(cfg, 10);
  const int n = in.p.sites();
  const Eigen::Index d = Eigen::Index{1} << n;
  const auto theta = theta_min_closed(in.p);
  const HamiltonianModel ham = build_abelian_toy(in.p);
  const AlgebraSpec amin =
      conjugate(maximal_abelian(n, cmat::Identity(d, d)), abelian_rotation(theta));
  const double sigma_opt = sigma_s(amin, ham.h);
  const double metric_closed = abelian_metric_closed(in.p, in.deps, in.dj);
  const auto dtheta = fd_dtheta(in.p, in.deps, in.dj);
  const double metric_fd =
      metric_element(amin, abelian_rotation_generator(dtheta)) / abelian_metric_scale(n);
  const double rel_err = std::abs(metric_fd - metric_closed) / std::max(metric_closed, 1e-12);

  CsvWriter csv(out, "toy-abelian", cfg, seed);
  csv.columns(
      "site,eps,j,deps,dj,theta_min,metric_term,sigma_s_opt,metric_closed,metric_fd,rel_err");
  for (int i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const double denom = in.p.eps[ii] * in.p.eps[ii] + in.p.j[ii] * in.p.j[ii];
    const double dth = (in.p.eps[ii] * in.dj[ii] - in.p.j[ii] * in.deps[ii]) / denom;
    csv.field(i)
        .field(in.p.eps[ii])
        .field(in.p.j[ii])
        .field(in.deps[ii])
        .field(in.dj[ii])
        .field(theta[ii])
        .field(dth * dth)
        .field(sigma_opt)
        .field(metric_closed)
        .field(metric_fd)
        .field(rel_err);
    csv.endrow();
  }
  const bool ok = sigma_opt < 1e-10 * std::max(1.0, ham.h.norm()) && rel_err < 1e-6;
  if (!ok)
    std::cerr << "toy-abelian: numerical check failed (sigma_s_opt=" << sigma_opt
              << ", rel_err=" << rel_err << ")\n";
  return ok ? 0 : 1;
}

int cmd_toy_factor(const json& cfg, const std::string& out, std::uint64_t seed) {
  const ToyInput in = parse_toy(cfg, 3);
  const int n = in.p.sites();
  const auto theta = theta_min_closed(in.p);
  const FactorToy toy = build_factor_toy(in.p);
  const AlgebraSpec amin_f = conjugate(toy.algebra, factor_rotation(theta));
  const double sigma_opt = sigma_s(amin_f, toy.ham.h);

  const auto dtheta = fd_dtheta(in.p, in.deps, in.dj);
  const double metric_factor =
      metric_element(amin_f, factor_rotation_generator(dtheta)) / factor_metric_scale(n);
  const Eigen::Index d_ab = Eigen::Index{1} << n;
  const AlgebraSpec amin_ab =
      conjugate(maximal_abelian(n, cmat::Identity(d_ab, d_ab)), abelian_rotation(theta));
  const double metric_abelian =
      metric_element(amin_ab, abelian_rotation_generator(dtheta)) / abelian_metric_scale(n);
  const double rel_err =
      std::abs(metric_factor - metric_abelian) / std::max(metric_abelian, 1e-12);

  CsvWriter csv(out, "toy-factor", cfg, seed);
  csv.columns("pair,eps,j,deps,dj,theta_min,sigma_s_opt,metric_factor,metric_abelian,rel_err");
  for (int i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    csv.field(i)
        .field(in.p.eps[ii])
        .field(in.p.j[ii])
        .field(in.deps[ii])
        .field(in.dj[ii])
        .field(theta[ii])
        .field(sigma_opt)
        .field(metric_factor)
        .field(metric_abelian)
        .field(rel_err);
    csv.endrow();
  }
  const bool ok =
      sigma_opt < 1e-10 * std::max(1.0, toy.ham.h.norm()) &&
      std::abs(metric_factor - metric_abelian) < 1e-8 * std::max(1.0, metric_abelian);
  if (!ok) std::cerr << "toy-factor: numerical check failed\n";
  return ok ? 0 : 1;
}

void write_sweep_csv(CsvWriter& csv, const std::vector<SweepRecord>& recs) {
  csv.columns("index,h,f_min,dist_prev,dist_next,g,endpoint,iters,converged,resonances,seed");
  for (const auto& r : recs) {
    csv.field(r.index)
        .field(r.strength)
        .field(r.f_min)
        .field(r.dist_prev)
        .field(r.dist_next)
        .field(r.g)
        .field(r.endpoint)
        .field(r.iters)
        .field(r.converged)
        .field(r.resonances)
        .field(r.seed);
    csv.endrow();
  }
}

int cmd_sweep_integrability(const json& cfg, const std::string& out, std::uint64_t seed) {
  require_known_keys(cfg,
                     {"schema_version", "seed", "n_sites", "j", "delta", "n_steps", "optimizer"},
                     "config");
  const int n = cfg.value("n_sites", 6);
  const double j = cfg.value("j", 1.05);
  const double delta = cfg.value("delta", 0.005);
  const int n_steps = cfg.value("n_steps", 10);
  if (n < 2 || n > 8 || n % 2 != 0)
    throw std::invalid_argument("config: n_sites must be even and within [2, 8]");
  const OptConfig opt = opt_config_from_json(cfg.contains("optimizer") ? cfg["optimizer"] : json());

  const SweepPlan plan = integrability_plan(n, j, delta, n_steps, seed, opt);
  const auto recs = run_sweep(plan);

  CsvWriter csv(out, "sweep-integrability", cfg, seed);
  write_sweep_csv(csv, recs);

  const Eigen::Index d = Eigen::Index{1} << n;
  std::vector<int> left(static_cast<std::size_t>(n / 2));
  for (int i = 0; i < n / 2; ++i) left[static_cast<std::size_t>(i)] = i;
  json sidecar{{"schema_version", kSchemaVersion},
               {"command", "sweep-integrability"},
               {"build", build_id()},
               {"seed", seed},
               {"config", cfg},
               {"bipartition", algebra_to_json(factor_bipartition(n, left, cmat::Identity(d, d)))},
               {"records", json::array()}};
  for (const auto& r : recs) sidecar["records"].push_back(record_to_json(r));
  std::ofstream side(sidecar_path(out), std::ios::binary);
  side << sidecar.dump(1) << "\n";
  return 0;
}

int cmd_sweep_disorder(const json& cfg, const std::string& out, std::uint64_t seed, int threads) {
  require_known_keys(cfg,
                     {"schema_version", "seed", "n_sites", "h", "j_center", "delta", "n_steps",
                      "n_avg", "optimizer"},
                     "config");
  const int n = cfg.value("n_sites", 4);
  const double h = cfg.value("h", 0.5);
  const double j_center = cfg.value("j_center", 1.05);
  const double delta = cfg.value("delta", 0.005);
  const int n_steps = cfg.value("n_steps", 5);
  const int n_avg = cfg.value("n_avg", 5);
  if (n < 2 || n > 8 || n % 2 != 0)
    throw std::invalid_argument("config: n_sites must be even and within [2, 8]");
  if (n_avg < 1) throw std::invalid_argument("config: n_avg must be >= 1");
  const OptConfig opt = opt_config_from_json(cfg.contains("optimizer") ? cfg["optimizer"] : json());

  // independent labeled streams per realization: results do not depend on the
  // thread count, and n_avg can grow without reshuffling earlier realizations
  RngStream root(seed, "disorder");
  std::vector<SweepPlan> plans;
  for (int r = 0; r < n_avg; ++r) {
    RngStream stream = root.substream("realization/" + std::to_string(r));
    plans.push_back(disorder_line_plan(n, h, j_center, delta, n_steps, stream, opt));
  }
  std::vector<std::vector<SweepRecord>> realizations(static_cast<std::size_t>(n_avg));
  std::atomic<int> cursor{0};
  auto worker = [&]() {
    for (int r = cursor.fetch_add(1); r < n_avg; r = cursor.fetch_add(1))
      realizations[static_cast<std::size_t>(r)] = run_sweep(plans[static_cast<std::size_t>(r)]);
  };
  const int nw = std::max(1, std::min(threads, n_avg));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  const auto aggregates = disorder_average(realizations);

  CsvWriter csv(out, "sweep-disorder", cfg, seed);
  csv.columns("strength,mean_g,stderr_g,mean_f,n_avg,n_converged");
  for (const auto& a : aggregates) {
    csv.field(a.strength)
        .field(a.mean_g)
        .field(a.stderr_g)
        .field(a.mean_f)
        .field(a.n_avg)
        .field(a.n_converged);
    csv.endrow();
  }

  json sidecar{{"schema_version", kSchemaVersion},
               {"command", "sweep-disorder"},
               {"build", build_id()},
               {"seed", seed},
               {"config", cfg},
               {"realizations", json::array()}};
  for (const auto& recs : realizations) {
    json one = json::array();
    for (const auto& r : recs) one.push_back(record_to_json(r));
    sidecar["realizations"].push_back(std::move(one));
  }
  std::ofstream side(sidecar_path(out), std::ios::binary);
  side << sidecar.dump(1) << "\n";
  return 0;
}

int cmd_otoc_probe(const json& cfg, const std::string& out, std::uint64_t seed) {
  require_known_keys(
      cfg, {"schema_version", "seed", "n_sites", "j", "h", "algebra", "t_max", "n_t", "n_samples"},
      "config");
  const int n = cfg.value("n_sites", 4);
  const double j = cfg.value("j", 1.05);
  const double h = cfg.value("h", 0.5);
  const std::string kind = cfg.value("algebra", std::string("factor"));
  const double t_max = cfg.value("t_max", 10.0);
  const int n_t = cfg.value("n_t", 50);
  const int n_samples = cfg.value("n_samples", 512);
  if (n < 2 || n > 8) throw std::invalid_argument("config: n_sites must be within [2, 8]");
  if (n_t < 1 || n_samples < 1)
    throw std::invalid_argument("config: n_t and n_samples must be >= 1");

  TfimParams p;
  p.n = n;
  p.j = j;
  p.h = h;
  const HamiltonianModel ham = build_tfim(p);
  const Eigen::Index d = Eigen::Index{1} << n;
  AlgebraSpec alg = [&]() -> AlgebraSpec {
    if (kind == "abelian") return maximal_abelian(n, cmat::Identity(d, d));
    if (kind != "factor") throw std::invalid_argument("config: algebra must be factor or abelian");
    if (n % 2 != 0) throw std::invalid_argument("config: factor probe needs even n_sites");
    std::vector<int> left(static_cast<std::size_t>(n / 2));
    for (int i = 0; i < n / 2; ++i) left[static_cast<std::size_t>(i)] = i;
    return factor_bipartition(n, left, cmat::Identity(d, d));
  }();

  RngStream root(seed, "otoc-probe");
  CsvWriter csv(out, "otoc-probe", cfg, seed);
  csv.columns("t,mean,std_error,n_samples");
  for (int i = 0; i <= n_t; ++i) {
    const double t = t_max * i / n_t;
    RngStream stream = root.substream("t/" + std::to_string(i));
    const OtocEstimate est = otoc_mc(alg, ham, t, n_samples, stream);
    csv.field(est.t).field(est.mean).field(est.std_error).field(est.n_samples);
    csv.endrow();
  }
  return 0;
}

int cmd_verify(const json& cfg, const std::string& out, std::uint64_t seed) {
  if (!cfg.is_null()) require_known_keys(cfg, {"schema_version", "seed"}, "config");
  const auto results = run_verify(seed);
  bool all_pass = true;
  std::cout << "check,pass,tolerance,observed,detail\n";
  for (const auto& r : results) {
    std::cout << r.name << "," << (r.pass ? 1 : 0) << "," << fmt_double(r.tolerance) << ","
              << fmt_double(r.observed) << "," << r.detail << "\n";
    if (!r.pass) {
      all_pass = false;
      std::cerr << "verify: check failed: " << r.name << " (observed " << r.observed
                << " vs tolerance " << r.tolerance << ")\n";
    }
  }
  if (!out.empty()) {
    CsvWriter csv(out, "verify", cfg.is_null() ? json::object() : cfg, seed);
    csv.columns("check,pass,tolerance,observed,detail");
    for (const auto& r : results) {
      csv.field(r.name).field(r.pass).field(r.tolerance).field(r.observed).field(r.detail);
      csv.endrow();
    }
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimally scrambling operator-algebra decompositions and algebra susceptibility"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::uint64_t seed_flag = kDefaultSeed;
  int threads = 1;
  if (const char* env = std::getenv("GTPS_THREADS")) threads = std::max(1, std::atoi(env));

  std::map<std::string, CLI::Option*> seed_opts;
  for (const char* name : {"toy-abelian", "toy-factor", "sweep-integrability", "sweep-disorder",
                           "otoc-probe", "verify"}) {
    CLI::App* c = app.add_subcommand(name);
    auto* cfg_opt = c->add_option("--config", config_path, "JSON config file");
    if (std::string(name) != "verify") cfg_opt->required();
    c->add_option("--out", out_path, "output CSV path");
    seed_opts[name] = c->add_option("--seed", seed_flag, "override the config seed");
    c->add_option("--threads", threads, "worker thread count (default $GTPS_THREADS or 1)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    json cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    const std::uint64_t seed = seed_opts.at(name)->count() > 0
                                   ? seed_flag
                                   : (cfg.is_null() ? kDefaultSeed
                                                    : cfg.value("seed", kDefaultSeed));
    if (out_path.empty() && name != "verify") out_path = name + ".csv";

    if (name == "toy-abelian") return cmd_toy_abelian(cfg, out_path, seed);
    if (name == "toy-factor") return cmd_toy_factor(cfg, out_path, seed);
    if (name == "sweep-integrability") return cmd_sweep_integrability(cfg, out_path, seed);
    if (name == "sweep-disorder") return cmd_sweep_disorder(cfg, out_path, seed, threads);
    if (name == "otoc-probe") return cmd_otoc_probe(cfg, out_path, seed);
    if (name == "verify") return cmd_verify(cfg, out_path, seed);
    std::cerr << "unknown subcommand\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
