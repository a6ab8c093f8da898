#include "wxrec/recsys.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>

#include <json.hpp>

#include "wxrec/error.hpp"
#include "wxrec/forecast.hpp"

namespace wxrec::recsys {
namespace {

using json = nlohmann::json;

const std::map<std::string, Interaction, std::less<>> kEmptyRow;

// Ranking compares blended scores at this resolution so that scores equal
// up to floating-point noise fall through to the id tie-break.
constexpr double kScoreResolution = 1e12;

double squared_norm(const std::map<std::string, Interaction, std::less<>>& row) {
  double s = 0.0;
  for (const auto& [loc, e] : row) s += e.weight * e.weight;
  return s;
}

struct Neighbor {
  std::string id;
  double sim = 0.0;
};

std::vector<Neighbor> neighbors(const InteractionMatrix& m, std::string_view user, std::size_t k) {
  std::vector<Neighbor> out;
  for (const auto& v : m.users()) {
    if (v == user) continue;
    const double s = user_similarity(m, user, v);
    if (s > 0.0) out.push_back({v, s});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Neighbor& a, const Neighbor& b) { return a.sim > b.sim; });
  if (out.size() > k) out.resize(k);
  return out;
}

double score_with(const InteractionMatrix& m, const std::vector<Neighbor>& nbrs,
                  std::string_view location) {
  double num = 0.0, den = 0.0;
  for (const auto& nb : nbrs) {
    num += nb.sim * m.weight(nb.id, location);
    den += nb.sim;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

void InteractionMatrix::add_location(Location location) {
  if (location.id.empty()) throw Error(Errc::invalid_argument, "empty location id");
  const std::string id = location.id;
  if (!locations_.emplace(id, std::move(location)).second) {
    throw Error(Errc::invalid_argument, "duplicate location id '" + id + "'");
  }
}

void InteractionMatrix::add_user(const std::string& user) {
  if (user.empty()) throw Error(Errc::invalid_argument, "empty user id");
  rows_.try_emplace(user);
}

void InteractionMatrix::record_interaction(const std::string& user, const std::string& location,
                                           double weight, std::string timestamp) {
  if (!has_location(location)) {
    throw Error(Errc::unknown_location, "unknown location '" + location + "'");
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw Error(Errc::non_positive_weight, "interaction weight must be positive");
  }
  add_user(user);
  auto& e = rows_[user][location];
  e.weight += weight;
  e.last_updated = timestamp.empty() ? utc_timestamp() : std::move(timestamp);
}

void InteractionMatrix::set_entry(const std::string& user, const std::string& location,
                                  double weight, std::string timestamp) {
  if (!has_location(location)) {
    throw Error(Errc::unknown_location, "unknown location '" + location + "'");
  }
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw Error(Errc::non_positive_weight, "interaction weight must be non-negative");
  }
  add_user(user);
  if (weight == 0.0) {
    rows_[user].erase(location);
    return;
  }
  rows_[user][location] = {weight, std::move(timestamp)};
}

bool InteractionMatrix::has_user(std::string_view user) const {
  return rows_.find(user) != rows_.end();
}

bool InteractionMatrix::has_location(std::string_view location) const {
  return locations_.find(location) != locations_.end();
}

const Location& InteractionMatrix::location(std::string_view id) const {
  auto it = locations_.find(id);
  if (it == locations_.end()) {
    throw Error(Errc::unknown_location, "unknown location '" + std::string(id) + "'");
  }
  return it->second;
}

double InteractionMatrix::weight(std::string_view user, std::string_view location) const {
  const auto& r = row(user);
  auto it = r.find(location);
  return it == r.end() ? 0.0 : it->second.weight;
}

std::vector<std::string> InteractionMatrix::users() const {
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& [u, row] : rows_) out.push_back(u);
  return out;
}

const std::map<std::string, Interaction, std::less<>>& InteractionMatrix::row(
    std::string_view user) const {
  auto it = rows_.find(user);
  return it == rows_.end() ? kEmptyRow : it->second;
}

double user_similarity(const InteractionMatrix& m, std::string_view u, std::string_view v) {
  if (!m.has_user(u)) throw Error(Errc::unknown_user, "unknown user '" + std::string(u) + "'");
  if (!m.has_user(v)) throw Error(Errc::unknown_user, "unknown user '" + std::string(v) + "'");
  const auto& ru = m.row(u);
  const auto& rv = m.row(v);
  // Walk both rows in location order so that (u, v) and (v, u) perform the
  // identical sequence of floating-point operations.
  double dot = 0.0;
  auto a = ru.begin();
  auto b = rv.begin();
  while (a != ru.end() && b != rv.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      dot += a->second.weight * b->second.weight;
      ++a;
      ++b;
    }
  }
  const double nu = squared_norm(ru);
  const double nv = squared_norm(rv);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), 0.0, 1.0);
}

double predict_score(const InteractionMatrix& m, std::string_view user, std::string_view location,
                     std::size_t k) {
  if (!m.has_user(user)) throw Error(Errc::unknown_user, "unknown user '" + std::string(user) + "'");
  if (!m.has_location(location)) {
    throw Error(Errc::unknown_location, "unknown location '" + std::string(location) + "'");
  }
  return score_with(m, neighbors(m, user, k), location);
}

double comfort_score(double temperature_c, std::optional<double> precip_mm) {
  double c = 1.0 - std::min(std::abs(temperature_c - 21.0) / 20.0, 1.0);
  if (precip_mm) c *= std::max(0.0, 1.0 - *precip_mm / 10.0);
  return std::clamp(c, 0.0, 1.0);
}

std::vector<Recommendation> recommend(const InteractionMatrix& m, std::string_view user,
                                      const RecommendOptions& opt,
                                      const store::StoreSnapshot* snapshot, Date target_date) {
  if (!m.has_user(user)) throw Error(Errc::unknown_user, "unknown user '" + std::string(user) + "'");
  if (!(opt.lambda >= 0.0 && opt.lambda <= 1.0)) {
    throw Error(Errc::invalid_argument, "lambda must lie in [0, 1]");
  }
  const bool have_weather = snapshot != nullptr && !snapshot->is_empty();
  if (opt.lambda > 0.0 && !have_weather) {
    throw Error(Errc::empty_store, "weather-aware ranking needs a non-empty store");
  }

  const auto& row = m.row(user);
  const bool cold = squared_norm(row) == 0.0;
  const auto nbrs = cold ? std::vector<Neighbor>{} : neighbors(m, user, opt.k);

  std::vector<Recommendation> recs;
  for (const auto& [id, loc] : m.locations()) {
    if (m.weight(user, id) > 0.0) continue;
    Recommendation r;
    r.location = id;
    if (cold) {
      for (const auto& u : m.users()) r.raw_cf_score += m.weight(u, id);
    } else {
      r.raw_cf_score = score_with(m, nbrs, id);
    }
    recs.push_back(std::move(r));
  }
  if (recs.empty()) return recs;

  const auto [lo_it, hi_it] = std::minmax_element(
      recs.begin(), recs.end(),
      [](const Recommendation& a, const Recommendation& b) { return a.raw_cf_score < b.raw_cf_score; });
  const double lo = lo_it->raw_cf_score;
  const double hi = hi_it->raw_cf_score;

  std::optional<std::string> temp_var, rain_var;
  if (have_weather) {
    temp_var = snapshot->variable_of_kind(store::VariableKind::temperature);
    rain_var = snapshot->variable_of_kind(store::VariableKind::rainfall);
  }

  for (auto& r : recs) {
    r.cf_score = hi > lo ? (r.raw_cf_score - lo) / (hi - lo) : 0.0;
    if (have_weather && temp_var) {
      const GeoPoint& p = m.location(r.location).point;
      try {
        const double t = forecast::forecast_at(*snapshot, p, target_date, *temp_var).value;
        std::optional<double> precip;
        if (rain_var) {
          try {
            precip = forecast::forecast_at(*snapshot, p, target_date, *rain_var).value;
          } catch (const Error& e) {
            if (e.code() != Errc::no_data) throw;
          }
        }
        r.comfort_score = comfort_score(t, precip);
        r.comfort_known = true;
      } catch (const Error& e) {
        if (e.code() != Errc::no_data) throw;
      }
    }
    const double blended = (1.0 - opt.lambda) * r.cf_score + opt.lambda * r.comfort_score;
    r.blended_score = std::round(blended * kScoreResolution) / kScoreResolution;
  }

  std::sort(recs.begin(), recs.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.blended_score != b.blended_score) return a.blended_score > b.blended_score;
    return a.location < b.location;
  });
  if (recs.size() > opt.n) recs.resize(opt.n);
  for (std::size_t i = 0; i < recs.size(); ++i) recs[i].rank = i + 1;
  return recs;
}

std::string to_jsonl(const InteractionMatrix& m) {
  std::string out;
  for (const auto& u : m.users()) {
    for (const auto& [loc, e] : m.row(u)) {
      json j{{"user", u}, {"location", loc}, {"weight", e.weight}, {"last_updated", e.last_updated}};
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

void load_jsonl(InteractionMatrix& m, std::string_view text) {
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      m.set_entry(j.at("user").get<std::string>(), j.at("location").get<std::string>(),
                  j.at("weight").get<double>(), j.value("last_updated", ""));
    } catch (const json::exception& e) {
      throw Error(Errc::invalid_argument,
                  "matrix line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::vector<Location> parse_locations(std::string_view json_text) {
  std::vector<Location> out;
  try {
    const json j = json::parse(json_text);
    for (const auto& e : j) {
      out.push_back({e.at("id").get<std::string>(),
                     GeoPoint(e.at("lat").get<double>(), e.at("lon").get<double>())});
    }
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("bad locations file: ") + e.what());
  }
  return out;
}

std::uint64_t digest(const InteractionMatrix& m) {
  std::string s = to_jsonl(m);
  for (const auto& [id, loc] : m.locations()) {
    s += id;
    s += json(loc.point.lat()).dump();
    s += json(loc.point.lon()).dump();
  }
  for (const auto& u : m.users()) s += u + ";";
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace wxrec::recsys
