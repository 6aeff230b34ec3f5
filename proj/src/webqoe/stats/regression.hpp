#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace webqoe::stats {

struct Term {
  std::string name;
  double coef = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p = 1.0;
};

struct FittedModel {
  std::string response;
  Term intercept{"(intercept)", 0.0, 0.0, 0.0, 1.0};
  std::vector<Term> terms;  // selected regressors, sorted by name
  double r2 = 0.0;
  double adj_r2 = 0.0;
  int n = 0;
};

// 1 - (1-r2)(n-1)/(n-p-1); requires n > p + 1.
double adjusted_r2(double r2, int n, int p);

// Least-squares fit of y on an intercept plus the named columns.
// Rank is checked during pivoted factorization at 1e-10 times the design
// norm; degrees of freedom must be at least 1.
FittedModel ols_fit(const std::vector<std::string>& names,
                    const std::vector<std::vector<double>>& columns,
                    const std::vector<double>& y, const std::string& response_name);

struct Dataset {
  std::vector<std::string> regressor_names;
  std::vector<std::vector<double>> columns;  // parallel to regressor_names
  std::map<std::string, std::vector<double>> responses;
};

// Exhaustive search over non-empty regressor subsets, maximizing adjusted
// R². Ties prefer fewer regressors, then lexicographic name order.
FittedModel best_subset_search(const Dataset& data, const std::string& response);

// Backward elimination: while any regressor has p >= 0.05, drop the
// largest-p one and refit. May end intercept-only.
FittedModel backward_prune(const Dataset& data, FittedModel model);

// best_subset_search followed by backward_prune.
FittedModel best_subset(const Dataset& data, const std::string& response);

double predict(const FittedModel& model, const std::map<std::string, double>& inputs);

// T at which the reference service's prediction matches the other service's
// at T = 0: |coef(service_dummy)| / |coef(retrans_pkts_per_s)|.
double crossover_t(const FittedModel& model);

nlohmann::ordered_json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);
FittedModel load_model(const std::filesystem::path& path);

// Human-readable form, e.g. "S_hat = 0.693 - 0.00673*T - 0.124*X".
std::string equation_string(const FittedModel& model);

}  // namespace webqoe::stats
