#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nc_oracle.hpp"
#include "wxrec/ncgrid.hpp"
#include "wxrec/service.hpp"
#include "wxrec/store.hpp"

namespace fx {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string read_file(const fs::path& p);
void write_file(const fs::path& p, const std::string& data);

wxrec::nc::GridDataset parse(const std::vector<std::uint8_t>& bytes);

/// time(record)=2, lat=2, lon=3, float "temp" holding 0.5, 1.5, ... 11.5
/// in write order; time is "days since 2000-01-01".
oracle::File small_grid_file();

/// A random file for round-trip checks, with what the parser should see.
struct RandomCase {
  oracle::File file;
  struct Expect {
    std::string name;
    int type;
    std::vector<double> values;  // as stored (float-rounded for floats)
    std::vector<std::uint8_t> mask;
  };
  std::vector<Expect> fields;
  std::size_t times = 0, lats = 0, lons = 0;
};
RandomCase random_case(std::mt19937_64& rng);

wxrec::store::SnapshotPtr snapshot_from_csv(const std::string& csv);

/// One cell at (50, 10): "temp" on July 15 of 2000..2010 equal to
/// 10 + 0.02 * (year - 2000).
std::string linear_trend_csv();

/// The 3 x 4 service grid: lats {50, 51, 52}, lons {10, 11, 12, 13}; monthly
/// "temp" and "precip" for 2019-01..2020-12 (day 15). In December 2020 the
/// cells (51, 11) and (51, 12) get 20 mm of rain, everything else is dry.
std::string service_grid_csv();

/// Diamond A(51,10) - B(51,11.5) - D(51,13) (short, rainy) and A - C(52.2,11.5) - D
/// (long, dry), plus a detached edge E(50,10) - F(50,10.3).
std::string diamond_geojson();

struct ServiceFiles {
  wxrec::service::ApiConfig config;
  fs::path fixtures;  // provider fixture directory
};

/// Writes snapshot, graph, locations, matrix and provider fixtures under
/// `root` and returns a config pointing at them (port 0, replay provider).
ServiceFiles write_service_fixture(const fs::path& root);

}  // namespace fx
