#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wxrec {

/// Every failure the library reports carries one of these codes. The
/// snake_case spelling returned by `to_string` is the stable identifier used
/// in HTTP error bodies and CLI error JSON.
enum class Errc {
  // ncgrid
  unsupported_format,
  malformed_header,
  truncated_data,
  missing_coordinates,
  invalid_coordinates,
  unknown_variable,
  malformed_csv,
  // store
  axis_mismatch,
  empty_input,
  empty_store,
  cell_out_of_range,
  bad_coords,
  snapshot_io,
  // forecast
  no_data,
  insufficient_years,
  bad_date,
  // cluster
  no_qualifying_cells,
  k_too_large,
  degenerate_features,
  dimension_mismatch,
  // recsys
  unknown_user,
  unknown_location,
  non_positive_weight,
  // router
  empty_graph,
  negative_precip,
  no_route,
  malformed_graph,
  // render
  degenerate_range,
  empty_field,
  malformed_image,
  // service
  fixture_corrupt,
  bad_config,
  invalid_argument,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace wxrec
