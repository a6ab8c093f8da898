#include "wxrec/error.hpp"

namespace wxrec {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::unsupported_format: return "unsupported_format";
    case Errc::malformed_header: return "malformed_header";
    case Errc::truncated_data: return "truncated_data";
    case Errc::missing_coordinates: return "missing_coordinates";
    case Errc::invalid_coordinates: return "invalid_coordinates";
    case Errc::unknown_variable: return "unknown_variable";
    case Errc::malformed_csv: return "malformed_csv";
    case Errc::axis_mismatch: return "axis_mismatch";
    case Errc::empty_input: return "empty_input";
    case Errc::empty_store: return "empty_store";
    case Errc::cell_out_of_range: return "cell_out_of_range";
    case Errc::bad_coords: return "bad_coords";
    case Errc::snapshot_io: return "snapshot_io";
    case Errc::no_data: return "no_data";
    case Errc::insufficient_years: return "insufficient_years";
    case Errc::bad_date: return "bad_date";
    case Errc::no_qualifying_cells: return "no_qualifying_cells";
    case Errc::k_too_large: return "k_too_large";
    case Errc::degenerate_features: return "degenerate_features";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::unknown_user: return "unknown_user";
    case Errc::unknown_location: return "unknown_location";
    case Errc::non_positive_weight: return "non_positive_weight";
    case Errc::empty_graph: return "empty_graph";
    case Errc::negative_precip: return "negative_precip";
    case Errc::no_route: return "no_route";
    case Errc::malformed_graph: return "malformed_graph";
    case Errc::degenerate_range: return "degenerate_range";
    case Errc::empty_field: return "empty_field";
    case Errc::malformed_image: return "malformed_image";
    case Errc::fixture_corrupt: return "fixture_corrupt";
    case Errc::bad_config: return "bad_config";
    case Errc::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace wxrec
