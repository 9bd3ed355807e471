#include "dfc/report_io.hpp"

#include <cmath>

namespace dfc {

namespace {

// JSON has no infinity; Gaussian components are stored as null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j) {
  if (j.is_null()) return kInf;
  return j.get<double>();
}

template <class T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("report is missing field '") + key + "'");
  return j.at(key).get<T>();
}

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("report is missing field '") + key + "'");
  return j.at(key);
}

double mean_or_nan(const Vector& v) { return v.size() ? v.mean() : std::nan(""); }

}  // namespace

json to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("expected a numeric array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number_from(j[i]);
  return v;
}

json to_json(const BlockSpec& b) {
  return {{"group_sizes", b.group_sizes}, {"sector_of_group", b.sector_of_group}, {"structure", to_string(b.structure)}};
}

BlockSpec block_spec_from_json(const json& j) {
  return BlockSpec(required<std::vector<Index>>(j, "group_sizes"), required<std::vector<Index>>(j, "sector_of_group"),
                   structure_from_string(required<std::string>(j, "structure")));
}

json to_json(const ConvTSpec& d) { return {{"kind", to_string(d.kind)}, {"m", d.m}, {"nu", to_json(d.nu)}}; }

ConvTSpec convt_from_json(const json& j) {
  const DistKind kind = dist_from_string(required<std::string>(j, "kind"));
  const auto m = required<std::vector<Index>>(j, "m");
  const Vector nu = vector_from_json(field(j, "nu"));
  Index n = 0;
  for (Index v : m) n += v;
  switch (kind) {
    case DistKind::Gauss: return ConvTSpec::gauss(n);
    case DistKind::MT: return ConvTSpec::mt(n, nu(0));
    case DistKind::CT: return ConvTSpec::ct(m, nu);
    case DistKind::HT: return ConvTSpec::ht(nu);
  }
  throw ValidationError("unknown distribution kind");
}

json to_json(const Recursion& r) {
  return {{"mean", to_json(r.mean)}, {"beta", to_json(r.beta)}, {"alpha", to_json(r.alpha)}};
}

Recursion recursion_from_json(const json& j) {
  return Recursion(vector_from_json(field(j, "mean")), vector_from_json(field(j, "beta")),
                   vector_from_json(field(j, "alpha")));
}

json to_json(const BfgsResult& r) {
  return {{"converged", r.converged},   {"message", r.message},         {"iterations", r.iterations},
          {"evaluations", r.evaluations}, {"grad_norm", number(r.grad_norm)}, {"objective", number(r.f)}};
}

json to_json(const EgarchParams& p) {
  return {{"a0", p.a0}, {"a1", p.a1}, {"b0", p.b0}, {"b1", p.b1}, {"b2", p.b2}, {"b3", p.b3}};
}

EgarchParams egarch_from_json(const json& j) {
  EgarchParams p;
  p.a0 = required<double>(j, "a0");
  p.a1 = required<double>(j, "a1");
  p.b0 = required<double>(j, "b0");
  p.b1 = required<double>(j, "b1");
  p.b2 = required<double>(j, "b2");
  p.b3 = required<double>(j, "b3");
  p.validate();
  return p;
}

json to_json(const FactorFit& f) {
  return {{"distribution", to_json(f.dist)}, {"recursion", to_json(f.rec)}, {"loglik", f.loglik},
          {"neg_loglik", -f.loglik},           {"p", f.p},                    {"T", f.T},
          {"bic", f.bic},                      {"convergence", to_json(f.optim)}};
}

FactorFit factor_fit_from_json(const json& j) {
  FactorFit f;
  f.dist = convt_from_json(field(j, "distribution"));
  f.kind = f.dist.kind;
  f.rec = recursion_from_json(field(j, "recursion"));
  f.loglik = required<double>(j, "loglik");
  f.p = required<Index>(j, "p");
  f.T = required<Index>(j, "T");
  f.bic = required<double>(j, "bic");
  return f;
}

json to_json(const JointFit& f) {
  return {{"method", "joint"},
          {"r", f.r},
          {"blocks", to_json(f.blocks)},
          {"distribution", to_json(f.dist)},
          {"scaling", to_string(f.scaling)},
          {"recursion", to_json(f.rec)},
          {"lambda", to_json(f.lambda)},
          {"loglik", f.loglik},
          {"neg_loglik", -f.loglik},
          {"p", f.p},
          {"T", f.T},
          {"bic", f.bic},
          {"summary", summary_json(f)},
          {"convergence", to_json(f.optim)}};
}

JointFit joint_fit_from_json(const json& j) {
  if (required<std::string>(j, "method") != "joint") throw ValidationError("report does not hold a joint fit");
  JointFit f;
  f.r = required<Index>(j, "r");
  f.blocks = block_spec_from_json(field(j, "blocks"));
  f.dist = convt_from_json(field(j, "distribution"));
  f.scaling = scaling_from_string(required<std::string>(j, "scaling"));
  f.rec = recursion_from_json(field(j, "recursion"));
  f.lambda = vector_from_json(field(j, "lambda"));
  f.loglik = required<double>(j, "loglik");
  f.p = required<Index>(j, "p");
  f.T = required<Index>(j, "T");
  f.bic = required<double>(j, "bic");
  if (f.rec.size() != f.r * f.blocks.n() + eta_size(f.blocks))
    throw ValidationError("joint report: recursion size does not match r, n and the block structure");
  return f;
}

json to_json(const DecoupledFit& f) {
  json s1 = json::array();
  for (const LoadingFit& lf : f.stage1)
    s1.push_back({{"recursion", to_json(lf.rec)},
                  {"lambda", lf.lambda},
                  {"nu_star", number(lf.nu_star)},
                  {"scaling", to_string(lf.scaling)},
                  {"loglik", lf.filter.loglik},
                  {"convergence", to_json(lf.optim)}});
  json s2 = json::array();
  for (const Stage2Unit& u : f.stage2)
    s2.push_back({{"first", u.first},
                  {"count", u.count},
                  {"eta_first", u.eta_first},
                  {"blocks", to_json(u.blocks)},
                  {"distribution", to_json(u.dist)},
                  {"recursion", to_json(u.rec)},
                  {"equicorr", u.equicorr},
                  {"loglik", u.loglik},
                  {"convergence", to_json(u.optim)}});
  return {{"method", "decoupled"},
          {"r", f.r},
          {"blocks", to_json(f.blocks)},
          {"distribution", to_json(f.dist)},
          {"scaling", to_string(f.scaling)},
          {"stage1", s1},
          {"stage2", s2},
          {"loglik", f.loglik},
          {"loglik_e", f.loglik_e},
          {"logdet_omega", f.logdet_omega},
          {"neg_loglik", -f.loglik},
          {"p", f.p},
          {"T", f.T},
          {"bic", f.bic},
          {"summary", summary_json(f)}};
}

DecoupledFit decoupled_fit_from_json(const json& j) {
  if (required<std::string>(j, "method") != "decoupled") throw ValidationError("report does not hold a decoupled fit");
  DecoupledFit f;
  f.r = required<Index>(j, "r");
  f.blocks = block_spec_from_json(field(j, "blocks"));
  f.dist = convt_from_json(field(j, "distribution"));
  f.kind = f.dist.kind;
  f.scaling = scaling_from_string(required<std::string>(j, "scaling"));
  for (const json& e : field(j, "stage1")) {
    LoadingFit lf;
    lf.rec = recursion_from_json(field(e, "recursion"));
    lf.lambda = required<double>(e, "lambda");
    lf.nu_star = number_from(field(e, "nu_star"));
    lf.scaling = scaling_from_string(required<std::string>(e, "scaling"));
    f.stage1.push_back(lf);
  }
  for (const json& e : field(j, "stage2")) {
    Stage2Unit u;
    u.first = required<Index>(e, "first");
    u.count = required<Index>(e, "count");
    u.eta_first = required<Index>(e, "eta_first");
    u.blocks = block_spec_from_json(field(e, "blocks"));
    u.dist = convt_from_json(field(e, "distribution"));
    u.rec = recursion_from_json(field(e, "recursion"));
    u.equicorr = required<bool>(e, "equicorr");
    u.loglik = required<double>(e, "loglik");
    f.stage2.push_back(u);
  }
  if (static_cast<Index>(f.stage1.size()) != f.blocks.n())
    throw ValidationError("decoupled report: one stage-1 fit per asset is required");
  f.loglik = required<double>(j, "loglik");
  f.loglik_e = required<double>(j, "loglik_e");
  f.logdet_omega = required<double>(j, "logdet_omega");
  f.p = required<Index>(j, "p");
  f.T = required<Index>(j, "T");
  f.bic = required<double>(j, "bic");
  return f;
}

json to_json(const OosReport& r) {
  return {{"split_index", r.split}, {"T", r.T}, {"loglik_in", r.loglik_in}, {"loglik_out", r.loglik_out}};
}

json summary_json(const JointFit& f) {
  const Index rn = f.r * f.blocks.n();
  const Index p = f.rec.size() - rn;
  const Recursion tau(f.rec.mean.head(rn), f.rec.beta.head(rn), f.rec.alpha.head(rn));
  const Recursion eta(f.rec.mean.tail(p), f.rec.beta.tail(p), f.rec.alpha.tail(p));
  const DynamicSummary st = summarize(tau), se = summarize(eta);
  json s = {{"tau", {{"mu_bar", st.mu_bar}, {"beta_bar", st.beta_bar}, {"alpha_bar", st.alpha_bar}}},
            {"eta", {{"mu_bar", number(p ? se.mu_bar : std::nan(""))},
                     {"beta_bar", number(p ? se.beta_bar : std::nan(""))},
                     {"alpha_bar", number(p ? se.alpha_bar : std::nan(""))}}},
            {"nu_bar", number(f.dist.kind == DistKind::Gauss ? std::nan("") : mean_or_nan(f.dist.nu))},
            {"nu", to_json(f.dist.kind == DistKind::Gauss ? Vector() : f.dist.nu)}};
  if (f.scaling == Scaling::Tikhonov) {
    s["log_lambda_bar"] = number(mean_or_nan(f.lambda.array().log().matrix()));
    s["log_lambda"] = to_json(f.lambda.array().log().matrix());
  }
  return s;
}

json summary_json(const DecoupledFit& f) {
  const Index n = static_cast<Index>(f.stage1.size());
  Vector mt(n), bt(n), at(n), ll(n), ns(n);
  for (Index i = 0; i < n; ++i) {
    const LoadingFit& lf = f.stage1[static_cast<std::size_t>(i)];
    mt(i) = lf.rec.mean.mean();
    bt(i) = lf.rec.beta.mean();
    at(i) = lf.rec.alpha.mean();
    ll(i) = std::log(lf.lambda);
    ns(i) = lf.nu_star;
  }
  std::vector<double> me, be, ae;
  for (const Stage2Unit& u : f.stage2)
    for (Index j = 0; j < u.rec.size(); ++j) {
      me.push_back(u.rec.mean(j));
      be.push_back(u.rec.beta(j));
      ae.push_back(u.rec.alpha(j));
    }
  auto avg = [](const std::vector<double>& v) {
    if (v.empty()) return std::nan("");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  json s = {{"tau", {{"mu_bar", mt.mean()}, {"beta_bar", bt.mean()}, {"alpha_bar", at.mean()}}},
            {"eta", {{"mu_bar", number(avg(me))}, {"beta_bar", number(avg(be))}, {"alpha_bar", number(avg(ae))}}},
            {"nu_bar", number(f.dist.kind == DistKind::Gauss ? std::nan("") : mean_or_nan(f.dist.nu))},
            {"nu", to_json(f.dist.kind == DistKind::Gauss ? Vector() : f.dist.nu)},
            {"nu_star", to_json(ns)}};
  if (f.scaling == Scaling::Tikhonov) {
    s["log_lambda_bar"] = number(ll.mean());
    s["log_lambda"] = to_json(ll);
  }
  return s;
}

}  // namespace dfc
