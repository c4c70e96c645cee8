#include "paneldyn/errors.hpp"

namespace paneldyn {

const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::unbalanced_panel: return "UnbalancedPanel";
    case errc::non_positive_price: return "NonPositivePrice";
    case errc::parse_failure: return "ParseFailure";
    case errc::missing_column: return "MissingColumn";
    case errc::insufficient_history: return "InsufficientHistory";
    case errc::rank_deficient: return "RankDeficient";
    case errc::degenerate_valuation: return "DegenerateValuation";
    case errc::non_positive_turnover: return "NonPositiveTurnover";
    case errc::degenerate_series: return "DegenerateSeries";
    case errc::zero_variance: return "ZeroVariance";
    case errc::unknown_model: return "UnknownModel";
    case errc::mismatched_samples: return "MismatchedSamples";
    case errc::single_cluster: return "SingleCluster";
    case errc::no_significant_terms: return "NoSignificantTerms";
    case errc::no_interior_extrema: return "NoInteriorExtrema";
    case errc::empty_range: return "EmptyRange";
    case errc::too_few_observations: return "TooFewObservations";
    case errc::invalid_config: return "InvalidConfig";
    case errc::io_failure: return "IoFailure";
  }
  return "UnknownError";
}

Error::Error(errc code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

void raise(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace paneldyn
