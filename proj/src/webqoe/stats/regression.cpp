#include "webqoe/stats/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "webqoe/core/fsio.hpp"
#include "webqoe/core/textio.hpp"
#include "webqoe/errors.hpp"
#include "webqoe/stats/distributions.hpp"

namespace webqoe::stats {

namespace {

constexpr const char* kInterceptName = "(intercept)";

struct OlsCore {
  std::vector<double> beta;  // per design column (intercept first)
  std::vector<double> se;
  double rss = 0.0;
  int df = 0;
};

// Householder QR with column pivoting on the design matrix (column-major).
// Rank failures surface as RankDeficient at the stated tolerance.
OlsCore solve_ols(std::vector<std::vector<double>> a, std::vector<double> y) {
  const std::size_t m = a.size();
  const std::size_t n = y.size();
  if (n < m + 1) {
    throw TooFewRows("ols: " + std::to_string(n) + " rows cannot support " +
                     std::to_string(m - 1) + " regressors plus intercept");
  }

  double fro2 = 0.0;
  for (const auto& col : a) {
    for (double v : col) fro2 += v * v;
  }
  const double tol = 1e-10 * std::sqrt(fro2);

  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;

  for (std::size_t k = 0; k < m; ++k) {
    std::size_t best = k;
    double best_norm2 = -1.0;
    for (std::size_t j = k; j < m; ++j) {
      double norm2 = 0.0;
      for (std::size_t i = k; i < n; ++i) norm2 += a[j][i] * a[j][i];
      if (norm2 > best_norm2) {
        best_norm2 = norm2;
        best = j;
      }
    }
    if (std::sqrt(best_norm2) <= tol) {
      throw RankDeficient("ols: design rank " + std::to_string(k) + " < " + std::to_string(m));
    }
    std::swap(a[k], a[best]);
    std::swap(perm[k], perm[best]);

    std::vector<double> v(a[k].begin() + static_cast<std::ptrdiff_t>(k), a[k].end());
    const double norm = std::sqrt(best_norm2);
    const double alpha = v[0] >= 0.0 ? -norm : norm;
    v[0] -= alpha;
    double v2 = 0.0;
    for (double w : v) v2 += w * w;
    a[k][k] = alpha;
    for (std::size_t i = k + 1; i < n; ++i) a[k][i] = 0.0;
    if (v2 > 0.0) {
      for (std::size_t j = k + 1; j < m; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < n; ++i) dot += v[i - k] * a[j][i];
        const double f = 2.0 * dot / v2;
        for (std::size_t i = k; i < n; ++i) a[j][i] -= f * v[i - k];
      }
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i - k] * y[i];
      const double f = 2.0 * dot / v2;
      for (std::size_t i = k; i < n; ++i) y[i] -= f * v[i - k];
    }
  }

  OlsCore out;
  out.df = static_cast<int>(n - m);
  for (std::size_t i = m; i < n; ++i) out.rss += y[i] * y[i];

  // R is in a[j][i] (i <= j); back-substitute for the permuted coefficients.
  std::vector<double> beta_p(m, 0.0);
  for (std::size_t ii = m; ii-- > 0;) {
    double acc = y[ii];
    for (std::size_t j = ii + 1; j < m; ++j) acc -= a[j][ii] * beta_p[j];
    beta_p[ii] = acc / a[ii][ii];
  }

  // R^{-1} column by column, then (X'X)^{-1} = R^{-1} R^{-T} up to the
  // permutation, which gives the coefficient variances.
  std::vector<std::vector<double>> rinv(m, std::vector<double>(m, 0.0));
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t ii = c + 1; ii-- > 0;) {
      double acc = (ii == c) ? 1.0 : 0.0;
      for (std::size_t j = ii + 1; j <= c; ++j) acc -= a[j][ii] * rinv[j][c];
      rinv[ii][c] = acc / a[ii][ii];
    }
  }
  const double sigma2 = out.df > 0 ? out.rss / out.df : 0.0;

  out.beta.assign(m, 0.0);
  out.se.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double var = 0.0;
    for (std::size_t k = i; k < m; ++k) var += rinv[i][k] * rinv[i][k];
    out.beta[perm[i]] = beta_p[i];
    out.se[perm[i]] = std::sqrt(std::max(0.0, sigma2 * var));
  }
  return out;
}

Term make_term(std::string name, double coef, double se, int df) {
  Term t;
  t.name = std::move(name);
  t.coef = coef;
  t.se = se;
  if (se > 0.0) {
    t.t = coef / se;
  } else {
    t.t = coef == 0.0 ? 0.0 : std::numeric_limits<double>::infinity() * (coef > 0 ? 1 : -1);
  }
  t.p = t_pvalue(t.t, df);
  return t;
}

std::vector<double> response_of(const Dataset& data, const std::string& response) {
  auto it = data.responses.find(response);
  if (it == data.responses.end()) {
    throw MissingRegressor("dataset has no response \"" + response + "\"");
  }
  return it->second;
}

std::vector<std::size_t> column_index_of(const Dataset& data,
                                         const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const std::string& name : names) {
    auto it = std::find(data.regressor_names.begin(), data.regressor_names.end(), name);
    if (it == data.regressor_names.end()) {
      throw MissingRegressor("dataset has no regressor \"" + name + "\"");
    }
    idx.push_back(static_cast<std::size_t>(it - data.regressor_names.begin()));
  }
  return idx;
}

FittedModel fit_named_subset(const Dataset& data, const std::vector<std::string>& names,
                             const std::string& response) {
  std::vector<std::vector<double>> cols;
  cols.reserve(names.size());
  for (std::size_t idx : column_index_of(data, names)) {
    cols.push_back(data.columns[idx]);
  }
  return ols_fit(names, cols, response_of(data, response), response);
}

}  // namespace

double adjusted_r2(double r2, int n, int p) {
  if (n <= p + 1) {
    throw TooFewRows("adjusted_r2: n = " + std::to_string(n) + " with p = " + std::to_string(p));
  }
  return 1.0 - (1.0 - r2) * (n - 1.0) / (n - p - 1.0);
}

FittedModel ols_fit(const std::vector<std::string>& names,
                    const std::vector<std::vector<double>>& columns,
                    const std::vector<double>& y, const std::string& response_name) {
  if (names.size() != columns.size()) {
    throw ValidationError("ols_fit: names and columns sizes differ");
  }
  const std::size_t n = y.size();
  for (const auto& col : columns) {
    if (col.size() != n) throw ValidationError("ols_fit: column length differs from response");
  }

  std::vector<std::vector<double>> design;
  design.emplace_back(n, 1.0);
  for (const auto& col : columns) design.push_back(col);

  const OlsCore core = solve_ols(design, y);

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double tss = 0.0;
  for (double v : y) tss += (v - mean) * (v - mean);

  FittedModel model;
  model.response = response_name;
  model.n = static_cast<int>(n);
  // Zero-variance response: define R^2 = 0 rather than 0/0.
  model.r2 = tss > 0.0 ? std::clamp(1.0 - core.rss / tss, 0.0, 1.0) : 0.0;
  model.adj_r2 = adjusted_r2(model.r2, model.n, static_cast<int>(names.size()));
  model.intercept = make_term(kInterceptName, core.beta[0], core.se[0], core.df);

  std::vector<std::size_t> order(names.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
  for (std::size_t i : order) {
    model.terms.push_back(make_term(names[i], core.beta[i + 1], core.se[i + 1], core.df));
  }
  return model;
}

FittedModel best_subset_search(const Dataset& data, const std::string& response) {
  if (data.regressor_names.empty()) {
    throw ValidationError("best_subset: no candidate regressors");
  }
  response_of(data, response);  // fail early on unknown response

  std::vector<std::string> candidates = data.regressor_names;
  std::sort(candidates.begin(), candidates.end());
  const std::size_t k = candidates.size();

  std::optional<FittedModel> best;
  std::vector<std::string> best_names;
  bool any_too_few = false;
  std::string first_error;

  for (std::uint64_t mask = 1; mask < (1ull << k); ++mask) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1ull << i)) names.push_back(candidates[i]);
    }
    FittedModel fit;
    try {
      fit = fit_named_subset(data, names, response);
    } catch (const TooFewRows& e) {
      any_too_few = true;
      if (first_error.empty()) first_error = e.what();
      continue;
    } catch (const RankDeficient&) {
      continue;
    }
    bool better = false;
    if (!best) {
      better = true;
    } else if (fit.adj_r2 > best->adj_r2) {
      better = true;
    } else if (fit.adj_r2 == best->adj_r2) {
      if (names.size() < best_names.size()) {
        better = true;
      } else if (names.size() == best_names.size() && names < best_names) {
        better = true;
      }
    }
    if (better) {
      best = std::move(fit);
      best_names = std::move(names);
    }
  }

  if (!best) {
    if (any_too_few) throw TooFewRows(first_error);
    throw NoValidSubset("best_subset: every candidate subset is rank-deficient");
  }
  return *best;
}

FittedModel backward_prune(const Dataset& data, FittedModel model) {
  while (!model.terms.empty()) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < model.terms.size(); ++i) {
      const Term& cur = model.terms[i];
      const Term& w = model.terms[worst];
      if (cur.p > w.p || (cur.p == w.p && cur.name > w.name)) worst = i;
    }
    if (model.terms[worst].p < 0.05) break;

    std::vector<std::string> names;
    for (std::size_t i = 0; i < model.terms.size(); ++i) {
      if (i != worst) names.push_back(model.terms[i].name);
    }
    model = fit_named_subset(data, names, model.response);
  }
  return model;
}

FittedModel best_subset(const Dataset& data, const std::string& response) {
  return backward_prune(data, best_subset_search(data, response));
}

double predict(const FittedModel& model, const std::map<std::string, double>& inputs) {
  double value = model.intercept.coef;
  for (const Term& t : model.terms) {
    auto it = inputs.find(t.name);
    if (it == inputs.end()) {
      throw MissingRegressor("predict: no input for \"" + t.name + "\"");
    }
    value += t.coef * it->second;
  }
  return value;
}

double crossover_t(const FittedModel& model) {
  const Term* t_term = nullptr;
  const Term* x_term = nullptr;
  for (const Term& t : model.terms) {
    if (t.name == "retrans_pkts_per_s") t_term = &t;
    if (t.name == "service_dummy") x_term = &t;
  }
  if (t_term == nullptr || x_term == nullptr) {
    throw MissingRegressor("crossover_t: model must contain retrans_pkts_per_s and service_dummy");
  }
  if (x_term->coef == 0.0) return 0.0;
  if (t_term->coef == 0.0) {
    throw ZeroCoefficient("crossover_t: retrans_pkts_per_s coefficient is zero");
  }
  return std::fabs(x_term->coef) / std::fabs(t_term->coef);
}

nlohmann::ordered_json model_to_json(const FittedModel& model) {
  auto term_json = [](const Term& t) {
    nlohmann::ordered_json j;
    j["coef"] = t.coef;
    j["se"] = t.se;
    j["t"] = t.t;
    j["p"] = t.p;
    return j;
  };
  nlohmann::ordered_json j;
  j["response"] = model.response;
  j["n"] = model.n;
  j["r2"] = model.r2;
  j["adj_r2"] = model.adj_r2;
  j["intercept"] = term_json(model.intercept);
  nlohmann::ordered_json regs = nlohmann::ordered_json::array();
  for (const Term& t : model.terms) {
    nlohmann::ordered_json r;
    r["name"] = t.name;
    r["coef"] = t.coef;
    r["se"] = t.se;
    r["t"] = t.t;
    r["p"] = t.p;
    regs.push_back(std::move(r));
  }
  j["regressors"] = std::move(regs);
  j["equation"] = equation_string(model);
  return j;
}

FittedModel model_from_json(const nlohmann::json& j) {
  FittedModel model;
  try {
    model.response = j.at("response").get<std::string>();
    model.n = j.value("n", 0);
    model.r2 = j.value("r2", 0.0);
    model.adj_r2 = j.value("adj_r2", 0.0);
    const nlohmann::json& ic = j.at("intercept");
    model.intercept.coef = ic.at("coef").get<double>();
    model.intercept.se = ic.value("se", 0.0);
    model.intercept.t = ic.value("t", 0.0);
    model.intercept.p = ic.value("p", 1.0);
    for (const nlohmann::json& r : j.at("regressors")) {
      Term t;
      t.name = r.at("name").get<std::string>();
      t.coef = r.at("coef").get<double>();
      t.se = r.value("se", 0.0);
      t.t = r.value("t", 0.0);
      t.p = r.value("p", 1.0);
      model.terms.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("fitted model JSON: ") + e.what());
  }
  std::sort(model.terms.begin(), model.terms.end(),
            [](const Term& a, const Term& b) { return a.name < b.name; });
  return model;
}

FittedModel load_model(const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError(0, path.string() + ": invalid JSON");
  try {
    return model_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

std::string equation_string(const FittedModel& model) {
  auto short_name = [](const std::string& name) -> std::string {
    if (name == "retrans_pkts_per_s") return "T";
    if (name == "service_dummy") return "X";
    return name;
  };
  std::string out = model.response + "_hat = " + fmt_double(model.intercept.coef);
  for (const Term& t : model.terms) {
    out += t.coef < 0.0 ? " - " : " + ";
    out += fmt_double(std::fabs(t.coef));
    out += "*";
    out += short_name(t.name);
  }
  return out;
}

}  // namespace webqoe::stats
