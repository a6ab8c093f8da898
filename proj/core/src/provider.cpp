#include "wxrec/provider.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "wxrec/error.hpp"

namespace wxrec::provider {
namespace fs = std::filesystem;
using json = nlohmann::json;

ProviderBatch parse_batch(std::string_view json_text, Date today) {
  ProviderBatch batch;
  try {
    const json doc = json::parse(json_text);
    batch.source = doc.value("source", "provider");
    for (const auto& o : doc.at("observations")) {
      store::Observation obs;
      if (o.contains("cell")) {
        obs.where = CellKey{o["cell"].at("lat_idx").get<std::size_t>(),
                            o["cell"].at("lon_idx").get<std::size_t>()};
      } else {
        obs.where = GeoPoint(o.at("lat").get<double>(), o.at("lon").get<double>());
      }
      obs.variable = o.at("variable").get<std::string>();
      if (obs.variable.empty()) throw Error(Errc::fixture_corrupt, "empty variable name");
      obs.day = parse_date(o.at("time").get<std::string>());
      if (obs.day > today) throw Error(Errc::fixture_corrupt, "observation is in the future");
      obs.value = o.at("value").get<double>();
      if (!std::isfinite(obs.value)) throw Error(Errc::fixture_corrupt, "non-finite value");
      batch.observations.push_back(std::move(obs));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::fixture_corrupt, std::string("bad provider batch: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::fixture_corrupt) throw;
    throw Error(Errc::fixture_corrupt, std::string("bad provider batch: ") + e.what());
  }
  return batch;
}

ReplayProvider::ReplayProvider(fs::path dir, Date today) : dir_(std::move(dir)), today_(today) {}

std::optional<ProviderBatch> ReplayProvider::next() {
  std::error_code ec;
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir_, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    if (name <= cursor_) continue;
    cursor_ = name;
    std::ifstream in(dir_ / name, std::ios::binary);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
      return parse_batch(text, today_);
    } catch (const Error& e) {
      std::cerr << "wxrec: skipping fixture " << name << ": " << e.what() << "\n";
      skipped_.push_back(name);
    }
  }
  return std::nullopt;
}

std::optional<store::SnapshotPtr> poll_provider(ProviderClient& client, store::Store& store,
                                                const Region& region) {
  while (auto batch = client.next()) {
    std::vector<store::Observation> kept;
    for (auto& o : batch->observations) {
      if (const auto* p = std::get_if<GeoPoint>(&o.where); p != nullptr && !region.contains(*p)) {
        continue;
      }
      kept.push_back(std::move(o));
    }
    if (kept.empty()) continue;
    try {
      return store.ingest_observations(kept, batch->source);
    } catch (const Error& e) {
      // A batch that does not fit the grid is dropped like a corrupt file.
      std::cerr << "wxrec: dropping batch from " << batch->source << ": " << e.what() << "\n";
    }
  }
  return std::nullopt;
}

}  // namespace wxrec::provider
