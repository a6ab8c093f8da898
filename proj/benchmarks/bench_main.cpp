#include <random>
#include <sstream>

#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "nc_oracle.hpp"
#include "wxrec/cluster.hpp"
#include "wxrec/ncgrid.hpp"
#include "wxrec/recsys.hpp"
#include "wxrec/router.hpp"
#include "wxrec/store.hpp"

using namespace wxrec;

namespace {

void BM_ParseClassic(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<std::vector<std::uint8_t>> files;
  for (int i = 0; i < 16; ++i) files.push_back(oracle::write(fx::random_case(rng).file).bytes);
  std::size_t bytes = 0;
  for (auto _ : state) {
    for (const auto& f : files) {
      benchmark::DoNotOptimize(nc::parse_classic(std::as_bytes(std::span(f.data(), f.size()))));
      bytes += f.size();
    }
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_ParseClassic);

void BM_KMeans(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 1);
  std::vector<std::vector<double>> rows(n, std::vector<double>(4));
  for (std::size_t i = 0; i < n; ++i)
    for (auto& v : rows[i]) v = g(rng) + 8.0 * static_cast<double>(i % 5);
  const auto f = cluster::FeatureMatrix::from_rows(rows, {"a", "b", "c", "d"});
  for (auto _ : state) benchmark::DoNotOptimize(cluster::kmeans_fit(f, 5, 42));
}
BENCHMARK(BM_KMeans)->Arg(1000)->Arg(10000);

void BM_ShortestPath(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  router::RoadGraph g;
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j) g.add_node(GeoPoint(0.01 * double(i), 0.01 * double(j)));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> len(0.5, 2);
  std::vector<double> costs;
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j) {
      const std::size_t id = i * side + j;
      if (j + 1 < side) g.add_edge(id, id + 1, len(rng)), costs.push_back(len(rng));
      if (i + 1 < side) g.add_edge(id, id + side, len(rng)), costs.push_back(len(rng));
    }
  for (auto _ : state) benchmark::DoNotOptimize(router::shortest_path(g, 0, side * side - 1, costs));
}
BENCHMARK(BM_ShortestPath)->Arg(30)->Arg(100);

void BM_Recommend(benchmark::State& state) {
  const auto users = static_cast<std::size_t>(state.range(0));
  recsys::InteractionMatrix m;
  for (int j = 0; j < 200; ++j) m.add_location({"L" + std::to_string(j), GeoPoint(0, 0.01 * j)});
  std::mt19937_64 rng(4);
  for (std::size_t i = 0; i < users; ++i) {
    const auto u = "u" + std::to_string(i);
    m.add_user(u);
    for (int k = 0; k < 10; ++k) m.record_interaction(u, "L" + std::to_string(rng() % 200), 1.0);
  }
  recsys::RecommendOptions opt;
  opt.lambda = 0;
  for (auto _ : state) benchmark::DoNotOptimize(recsys::recommend(m, "u0", opt, nullptr, Date::from_ymd(2020, 1, 1)));
}
BENCHMARK(BM_Recommend)->Arg(100)->Arg(2000);

void BM_NearestCell(benchmark::State& state) {
  std::ostringstream csv;
  csv << "time,lat,lon,temp\n";
  for (int i = 0; i < 90; ++i)
    for (int j = 0; j < 180; ++j) csv << "2020-01-01," << -44.5 + i << ',' << -89.5 + j << ",1\n";
  const auto snap = fx::snapshot_from_csv(csv.str());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 1024; ++i) pts.emplace_back(lat(rng), lon(rng));
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(store::nearest_cell(*snap, pts[k++ % pts.size()]));
}
BENCHMARK(BM_NearestCell);

}  // namespace
BENCHMARK_MAIN();
