// dfcorr: standardize, fit, simulate and evaluate dynamic factor correlation models.

#include "dfc/egarch.hpp"
#include "dfc/estimate.hpp"
#include "dfc/loadings.hpp"
#include "dfc/matcorr.hpp"
#include "dfc/panel.hpp"
#include "dfc/report_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

namespace fs = std::filesystem;
using namespace dfc;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Flags {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::string method, dist, structure, scaling, split;
};

struct Group {
  std::string name;
  std::string sector;
  std::vector<std::string> columns;
};

struct Config {
  json raw;
  fs::path base;
  std::vector<Group> groups;  // sector-contiguous order
  std::vector<std::string> asset_columns;
  std::vector<std::string> factor_columns;
  Structure structure = Structure::FullBlock;
  DistKind dist = DistKind::Gauss;
  DistKind factor_dist = DistKind::MT;
  std::string method = "decoupled";
  Scaling scaling = Scaling::Tikhonov;
  std::uint64_t seed = 1;
  std::string split;

  std::string path(const char* key) const {
    if (!raw.contains(key)) throw ValidationError(std::string("config is missing '") + key + "'");
    const fs::path p = raw.at(key).get<std::string>();
    return (p.is_absolute() ? p : base / p).string();
  }
  bool has(const char* key) const { return raw.contains(key) && !raw.at(key).is_null(); }

  BlockSpec blocks() const {
    std::vector<Index> sizes, sectors;
    std::map<std::string, Index> ids;
    for (const Group& g : groups) {
      if (!ids.count(g.sector)) ids.emplace(g.sector, static_cast<Index>(ids.size()));
      sizes.push_back(static_cast<Index>(g.columns.size()));
      sectors.push_back(ids.at(g.sector));
    }
    return BlockSpec(sizes, sectors, structure);
  }
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON (" + e.what() + ")");
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

Config load_config(const Flags& flags) {
  Config c;
  if (!flags.config.empty()) {
    c.raw = read_json(flags.config);
    c.base = fs::absolute(flags.config).parent_path();
  } else {
    c.raw = json::object();
    c.base = fs::current_path();
  }
  const json& r = c.raw;
  if (!r.is_object()) throw ValidationError("config must be a JSON object");
  if (r.contains("groups")) {
    // order groups so that sectors are contiguous (first appearance order)
    std::vector<std::string> sector_order;
    std::vector<Group> raw_groups;
    for (const json& g : r.at("groups")) {
      Group gr;
      gr.name = g.value("name", "group" + std::to_string(raw_groups.size() + 1));
      gr.sector = g.value("sector", std::string("all"));
      gr.columns = g.at("columns").get<std::vector<std::string>>();
      if (gr.columns.empty()) throw ValidationError("group '" + gr.name + "' has no columns");
      if (std::find(sector_order.begin(), sector_order.end(), gr.sector) == sector_order.end())
        sector_order.push_back(gr.sector);
      raw_groups.push_back(gr);
    }
    for (const auto& s : sector_order)
      for (const auto& g : raw_groups)
        if (g.sector == s) c.groups.push_back(g);
    for (const auto& g : c.groups) c.asset_columns.insert(c.asset_columns.end(), g.columns.begin(), g.columns.end());
    auto sorted = c.asset_columns;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ValidationError("a column appears in more than one group");
  }
  if (r.contains("factors")) c.factor_columns = r.at("factors").get<std::vector<std::string>>();
  c.structure = structure_from_string(flags.structure.empty() ? r.value("structure", std::string("fbc")) : flags.structure);
  c.dist = dist_from_string(flags.dist.empty() ? r.value("distribution", std::string("gauss")) : flags.dist);
  c.factor_dist = dist_from_string(r.value("factor_distribution", std::string("mt")));
  c.method = flags.method.empty() ? r.value("method", std::string("decoupled")) : flags.method;
  if (c.method != "joint" && c.method != "decoupled")
    throw ValidationError("method must be 'joint' or 'decoupled' (got '" + c.method + "')");
  c.scaling = scaling_from_string(flags.scaling.empty() ? r.value("scaling", std::string("tikhonov")) : flags.scaling);
  c.seed = flags.seed ? *flags.seed : r.value("seed", std::uint64_t{1});
  c.split = flags.split.empty() ? r.value("split", std::string()) : flags.split;
  if (!c.split.empty() && !is_iso_date(c.split)) throw ValidationError("split '" + c.split + "' is not an ISO-8601 date");
  return c;
}

json config_echo(const Config& c) {
  json groups = json::array();
  for (const Group& g : c.groups) groups.push_back({{"name", g.name}, {"sector", g.sector}, {"columns", g.columns}});
  return {{"structure", to_string(c.structure)},
          {"distribution", to_string(c.dist)},
          {"factor_distribution", to_string(c.factor_dist)},
          {"method", c.method},
          {"scaling", to_string(c.scaling)},
          {"seed", c.seed},
          {"split", c.split.empty() ? json(nullptr) : json(c.split)},
          {"groups", groups}};
}

struct Panels {
  Panel assets;   // model column order
  Panel factors;
  std::vector<std::string> original_columns;
};

Panels load_panels(const Config& c) {
  Panels p;
  const Panel assets = read_panel_csv(c.path("assets_panel"), 100);
  const Panel factors = read_panel_csv(c.path("factors_panel"), 100);
  if (assets.dates != factors.dates) throw ValidationError("asset and factor panels must share the same dates");
  if (c.groups.empty()) throw ValidationError("config needs a non-empty 'groups' list");
  p.original_columns = assets.columns;
  p.assets = assets.select(c.asset_columns);
  p.factors = c.factor_columns.empty() ? factors : factors.select(c.factor_columns);
  return p;
}

Index split_index(const Config& c, const Panel& panel) {
  if (c.split.empty()) return panel.rows();
  const Index k = panel.rows_before(c.split);
  if (k < 1 || k > panel.rows()) throw ValidationError("split date " + c.split + " is outside the panel");
  return k;
}

Panel path_panel(const std::vector<std::string>& dates, const std::vector<std::string>& names, const Matrix& values) {
  Panel p;
  p.dates = dates;
  p.columns = names;
  p.values = values;
  return p;
}

std::vector<std::string> pair_names(const std::string& prefix, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  const std::size_t n = names.size();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) out.push_back(prefix + names[i] + ":" + names[j]);
  return out;
}

// --------------------------------------------------------------------------

int cmd_standardize(const Flags& flags) {
  const Config c = load_config(flags);
  const fs::path out = flags.out;
  fs::create_directories(out);
  json series = json::array();
  auto run = [&](const Panel& panel, const std::string& kind) {
    Panel z = panel;
    for (Index j = 0; j < panel.values.cols(); ++j) {
      const EgarchFit fit = egarch_fit(panel.values.col(j));
      z.values.col(j) = fit.filter.z;
      json s = to_json(fit.params);
      s["name"] = panel.columns[static_cast<std::size_t>(j)];
      s["panel"] = kind;
      s["loglik"] = fit.filter.loglik;
      s["convergence"] = to_json(fit.optim);
      series.push_back(s);
    }
    return z;
  };
  const Panel returns = read_panel_csv(c.path("returns_panel"), 100);
  write_panel_csv((out / "z.csv").string(), run(returns, "assets"));
  json report = {{"command", "standardize"}, {"asset_columns", returns.columns}};
  if (c.has("factor_returns_panel")) {
    const Panel fr = read_panel_csv(c.path("factor_returns_panel"), 100);
    if (fr.dates != returns.dates) throw ValidationError("return and factor-return panels must share the same dates");
    write_panel_csv((out / "f.csv").string(), run(fr, "factors"));
    report["factor_columns"] = fr.columns;
  }
  report["series"] = series;
  write_json(out / "egarch.json", report);
  return 0;
}

int cmd_fit(const Flags& flags) {
  const Config c = load_config(flags);
  const Panels p = load_panels(c);
  const BlockSpec blocks = c.blocks();
  const Index T_all = p.assets.rows();
  const Index T = split_index(c, p.assets);
  const Matrix z_in = p.assets.values.topRows(T);
  const Matrix f_in = p.factors.values.topRows(T);

  const FactorFit ff = fit_factor_model(f_in, c.factor_dist);
  const FactorFilterResult fpath = run_factor_model(ff, p.factors.values);
  const Matrix u_in = fpath.u.topRows(T);

  json core;
  Matrix tau, eta;
  double core_loglik = 0.0;
  Index core_p = 0;
  if (c.method == "joint") {
    const JointFit jf = fit_core_joint(z_in, u_in, blocks, c.dist, c.scaling);
    core = to_json(jf);
    const CoreFilterResult res = run_core_joint(jf, p.assets.values, fpath.u);
    const Index rn = jf.r * blocks.n();
    tau = res.path.leftCols(rn);
    eta = res.path.rightCols(res.path.cols() - rn);
    core_loglik = jf.loglik;
    core_p = jf.p;
  } else {
    const DecoupledFit df = fit_core_decoupled(z_in, u_in, blocks, c.dist, c.scaling);
    core = to_json(df);
    const DecoupledPath res = run_core_decoupled(df, p.assets.values, fpath.u);
    tau = res.tau;
    eta = res.eta;
    core_loglik = df.loglik;
    core_p = df.p;
  }

  const fs::path out = flags.out;
  fs::create_directories(out);
  const auto& dates = p.assets.dates;
  const auto& an = p.assets.columns;
  const auto& fn = p.factors.columns;
  const Index r = static_cast<Index>(fn.size());
  write_panel_csv((out / "gamma_f.csv").string(), path_panel(dates, pair_names("gamma:", fn), fpath.gamma));
  write_panel_csv((out / "factor_corr.csv").string(), path_panel(dates, pair_names("corr:", fn), fpath.corr));
  std::vector<std::string> tau_names, rho_names;
  for (const auto& a : an)
    for (const auto& f : fn) {
      tau_names.push_back("tau:" + a + ":" + f);
      rho_names.push_back("rho:" + a + ":" + f);
    }
  Matrix rho(tau.rows(), tau.cols());
  for (Index t = 0; t < tau.rows(); ++t)
    for (Index i = 0; i < blocks.n(); ++i)
      rho.row(t).segment(i * r, r) = rho_of_tau(tau.row(t).segment(i * r, r).transpose()).transpose();
  write_panel_csv((out / "tau.csv").string(), path_panel(dates, tau_names, tau));
  write_panel_csv((out / "loadings.csv").string(), path_panel(dates, rho_names, rho));
  std::vector<std::string> eta_names, cell_names;
  if (blocks.structure == Structure::Unrestricted) {
    eta_names = pair_names("gamma:", an);
    cell_names = pair_names("corr:", an);
  } else {
    for (const auto& [k, l] : eta_cells(blocks))
      eta_names.push_back("eta:" + c.groups[static_cast<std::size_t>(k)].name + ":" +
                          c.groups[static_cast<std::size_t>(l)].name);
    for (Index l = 0; l < blocks.K(); ++l)
      for (Index k = l; k < blocks.K(); ++k)
        cell_names.push_back("rho:" + c.groups[static_cast<std::size_t>(k)].name + ":" +
                             c.groups[static_cast<std::size_t>(l)].name);
  }
  write_panel_csv((out / "eta.csv").string(), path_panel(dates, eta_names, eta));
  Matrix cells(eta.rows(), static_cast<Index>(cell_names.size()));
  for (Index t = 0; t < eta.rows(); ++t) {
    if (blocks.structure == Structure::Unrestricted) {
      cells.row(t) = vecl(corr_of_gamma(eta.row(t).transpose())).transpose();
      continue;
    }
    const Matrix m = cells_of_eta(eta.row(t).transpose(), blocks);
    Index j = 0;
    for (Index l = 0; l < blocks.K(); ++l)
      for (Index k = l; k < blocks.K(); ++k) cells(t, j++) = m(k, l);
  }
  write_panel_csv((out / "block_corr.csv").string(), path_panel(dates, cell_names, cells));

  const double total = ff.loglik + core_loglik;
  const Index total_p = ff.p + core_p;
  json report = {{"command", "fit"},
                 {"config", config_echo(c)},
                 {"columns",
                  {{"assets", an}, {"factors", fn}, {"original_asset_order", p.original_columns}}},
                 {"dates", {{"first", dates.front()}, {"last", dates.back()}, {"last_in_sample", dates[T - 1]}}},
                 {"T", T},
                 {"T_panel", T_all},
                 {"factor", to_json(ff)},
                 {"core", core},
                 {"loglik", total},
                 {"neg_loglik", -total},
                 {"p", total_p},
                 {"bic", bic(total, total_p, T)}};
  write_json(out / "fit.json", report);
  return 0;
}

struct LoadedModel {
  FactorFit factor;
  std::optional<JointFit> joint;
  std::optional<DecoupledFit> decoupled;
  json report;
};

LoadedModel load_model(const std::string& path) {
  LoadedModel m;
  m.report = read_json(path);
  if (!m.report.contains("factor") || !m.report.contains("core"))
    throw ValidationError(path + ": not a fit report");
  m.factor = factor_fit_from_json(m.report.at("factor"));
  const json& core = m.report.at("core");
  if (core.value("method", std::string()) == "joint")
    m.joint = joint_fit_from_json(core);
  else
    m.decoupled = decoupled_fit_from_json(core);
  return m;
}

int cmd_evaluate(const Flags& flags) {
  const Config c = load_config(flags);
  std::vector<std::string> paths;
  if (c.has("reports"))
    for (const auto& r : c.raw.at("reports")) {
      const fs::path pr = r.get<std::string>();
      paths.push_back((pr.is_absolute() ? pr : c.base / pr).string());
    }
  if (c.has("report")) paths.push_back(c.path("report"));
  if (paths.empty()) throw ValidationError("config needs 'report' or 'reports'");
  if (c.split.empty()) throw ValidationError("evaluate needs a split date (--split or config 'split')");

  json models = json::array();
  Index best = -1;
  double best_ll = -kInf;
  Index split = 0, T = 0;
  for (const auto& path : paths) {
    const LoadedModel m = load_model(path);
    const Config mc = [&] {
      Config cc = c;
      cc.groups.clear();
      cc.asset_columns.clear();
      for (const auto& g : m.report.at("config").at("groups")) {
        Group gr{g.at("name").get<std::string>(), g.at("sector").get<std::string>(),
                 g.at("columns").get<std::vector<std::string>>()};
        cc.groups.push_back(gr);
        cc.asset_columns.insert(cc.asset_columns.end(), gr.columns.begin(), gr.columns.end());
      }
      cc.factor_columns = m.report.at("columns").at("factors").get<std::vector<std::string>>();
      return cc;
    }();
    const Panels p = load_panels(mc);
    split = split_index(c, p.assets);
    T = p.assets.rows();
    const FactorFilterResult fpath = run_factor_model(m.factor, p.factors.values);
    const OosReport fo = evaluate_oos(m.factor, p.factors.values, split);
    const OosReport co = m.joint ? evaluate_oos(*m.joint, p.assets.values, fpath.u, split)
                                 : evaluate_oos(*m.decoupled, p.assets.values, fpath.u, split);
    const json& cfg = m.report.at("config");
    models.push_back({{"report", path},
                      {"method", cfg.at("method")},
                      {"distribution", cfg.at("distribution")},
                      {"structure", cfg.at("structure")},
                      {"scaling", cfg.at("scaling")},
                      {"core", to_json(co)},
                      {"factor", to_json(fo)},
                      {"best", false}});
    if (co.loglik_out > best_ll) {
      best_ll = co.loglik_out;
      best = static_cast<Index>(models.size()) - 1;
    }
  }
  if (best >= 0 && split < T) models[static_cast<std::size_t>(best)]["best"] = true;
  json report = {{"command", "evaluate"}, {"split", c.split}, {"split_index", split}, {"T", T}, {"models", models}};
  const fs::path out = flags.out;
  fs::create_directories(out);
  write_json(out / "oos.json", report);
  return 0;
}

int cmd_simulate(const Flags& flags) {
  const Config c = load_config(flags);
  const LoadedModel m = load_model(c.path("params"));
  const Index T = c.raw.value("T", Index{1000});
  if (T < 0) throw ValidationError("T must be non-negative");
  const JointFit jf = m.joint ? *m.joint : joint_view(*m.decoupled);
  const Index n = jf.blocks.n();
  const Index r = jf.r;
  const Matrix f = simulate_factor(m.factor.rec, m.factor.dist, T, c.seed);
  const Matrix u = run_factor_model(m.factor, f).u;
  const Matrix z = simulate_core_joint(jf.model(), jf.rec, jf.lambda, jf.scaling, u, c.seed + 1);

  std::vector<std::string> an, fn;
  if (m.report.contains("columns")) {
    an = m.report.at("columns").at("assets").get<std::vector<std::string>>();
    fn = m.report.at("columns").at("factors").get<std::vector<std::string>>();
  }
  if (static_cast<Index>(an.size()) != n) {
    an.clear();
    for (Index i = 0; i < n; ++i) an.push_back("A" + std::to_string(i + 1));
  }
  if (static_cast<Index>(fn.size()) != r) {
    fn.clear();
    for (Index j = 0; j < r; ++j) fn.push_back("F" + std::to_string(j + 1));
  }
  const auto dates = business_dates(c.raw.value("start_date", std::string("2000-01-03")), T);
  const fs::path out = flags.out;
  fs::create_directories(out);
  write_panel_csv((out / "z.csv").string(), path_panel(dates, an, z));
  write_panel_csv((out / "f.csv").string(), path_panel(dates, fn, f));
  if (c.has("egarch")) {
    const json eg = read_json(c.path("egarch"));
    std::map<std::string, EgarchParams> params;
    for (const auto& s : eg.at("series")) params[s.at("name").get<std::string>()] = egarch_from_json(s);
    auto apply = [&](const Matrix& x, const std::vector<std::string>& names) {
      Matrix out_r(x.rows(), x.cols());
      for (Index j = 0; j < x.cols(); ++j) {
        const auto it = params.find(names[static_cast<std::size_t>(j)]);
        if (it == params.end())
          throw ValidationError("egarch report has no series '" + names[static_cast<std::size_t>(j)] + "'");
        out_r.col(j) = egarch_returns(it->second, x.col(j));
      }
      return out_r;
    };
    write_panel_csv((out / "returns.csv").string(), path_panel(dates, an, apply(z, an)));
    write_panel_csv((out / "factor_returns.csv").string(), path_panel(dates, fn, apply(f, fn)));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic factor correlation models: standardize, fit, simulate, evaluate"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON configuration file");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", seed, "random seed")->each([&](const std::string&) { flags.seed = seed; });
    sub->add_option("--method", flags.method, "joint|decoupled")->check(CLI::IsMember({"joint", "decoupled"}));
    sub->add_option("--dist", flags.dist, "gauss|mt|ct|ht")->check(CLI::IsMember({"gauss", "mt", "ct", "ht"}));
    sub->add_option("--structure", flags.structure, "unrestricted|fbc|sbc|dbc")
        ->check(CLI::IsMember({"unrestricted", "fbc", "sbc", "dbc"}));
    sub->add_option("--scaling", flags.scaling, "identity|mp|tikhonov")
        ->check(CLI::IsMember({"identity", "mp", "tikhonov"}));
    sub->add_option("--split", flags.split, "out-of-sample split date (YYYY-MM-DD)");
  };
  auto* standardize = app.add_subcommand("standardize", "AR(1)-EGARCH standardization of return panels");
  auto* fit = app.add_subcommand("fit", "fit the factor and core correlation models");
  auto* simulate = app.add_subcommand("simulate", "simulate panels from a fit report");
  auto* evaluate = app.add_subcommand("evaluate", "out-of-sample evaluation of fit reports");
  for (auto* s : {standardize, fit, simulate, evaluate}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*standardize) return cmd_standardize(flags);
    if (*fit) return cmd_fit(flags);
    if (*simulate) return cmd_simulate(flags);
    if (*evaluate) return cmd_evaluate(flags);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const StructureError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON input (" << e.what() << ")\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
