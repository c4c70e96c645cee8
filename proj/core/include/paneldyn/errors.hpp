#pragma once

#include <stdexcept>
#include <string>

namespace paneldyn {

/// Stable error classes. The CLI prints failures as "<class>: <message>"
/// on a single line, so the class names double as the machine-readable
/// part of the diagnostic.
enum class errc {
  unbalanced_panel,
  non_positive_price,
  parse_failure,
  missing_column,
  insufficient_history,
  rank_deficient,
  degenerate_valuation,
  non_positive_turnover,
  degenerate_series,
  zero_variance,
  unknown_model,
  mismatched_samples,
  single_cluster,
  no_significant_terms,
  no_interior_extrema,
  empty_range,
  too_few_observations,
  invalid_config,
  io_failure,
};

const char* errc_name(errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message);
  errc code() const noexcept { return code_; }
  const char* code_name() const noexcept { return errc_name(code_); }

 private:
  errc code_;
};

[[noreturn]] void raise(errc code, const std::string& message);

}  // namespace paneldyn
