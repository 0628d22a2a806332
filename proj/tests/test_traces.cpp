#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "mecsim/rng.hpp"
#include "mecsim/traces.hpp"

using namespace mecsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mecsim_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
};

}  // namespace

TEST_CASE("station loader reads rows and rejects bad input") {
  TempDir tmp;
  SUBCASE("three valid rows with header") {
    const auto path = tmp.file("s.csv",
                               "id,lat,lng\n"
                               "0,37.77,-122.41\n"
                               "1,37.78,-122.42\n"
                               "2,37.79,-122.43\n");
    const auto [stations, servers] = load_station_csv(path);
    CHECK(stations.size() == 3);
    CHECK(servers.size() == 3);
    CHECK(stations[1].location.lat == doctest::Approx(37.78));
    CHECK(servers[2].base_station_id == 2);
  }
  SUBCASE("empty file is an error") {
    const auto path = tmp.file("empty.csv", "");
    CHECK_THROWS_AS(load_station_csv(path), TraceError);
  }
  SUBCASE("header-only file is an error") {
    const auto path = tmp.file("h.csv", "id,lat,lng\n");
    CHECK_THROWS_AS(load_station_csv(path), TraceError);
  }
  SUBCASE("duplicate id is an error") {
    const auto path = tmp.file("dup.csv", "0,37.77,-122.41\n0,37.78,-122.42\n");
    CHECK_THROWS_AS(load_station_csv(path), TraceError);
  }
  SUBCASE("malformed row reports the line number") {
    const auto path = tmp.file("bad.csv", "0,37.77,-122.41\n1,not_a_number,-122.42\n");
    try {
      load_station_csv(path);
      FAIL("expected a trace error");
    } catch (const TraceError& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
}

TEST_CASE("mobility loader groups, sorts and deduplicates") {
  TempDir tmp;
  SUBCASE("two taxis, shuffled input comes out sorted") {
    const auto path = tmp.file("m.csv",
                               "taxi_id,lat,lng,occupancy,timestamp\n"
                               "7,37.70,-122.40,1,120\n"
                               "3,37.71,-122.41,0,60\n"
                               "7,37.72,-122.42,1,60\n"
                               "3,37.73,-122.43,0,0\n");
    const auto traces = load_mobility_csv(path);
    REQUIRE(traces.size() == 2);
    CHECK(traces[0].first == 3);
    CHECK(traces[0].second.samples.size() == 2);
    CHECK(traces[0].second.samples[0].first == 0.0);
    CHECK(traces[0].second.samples[1].first == 60.0);
    CHECK(traces[1].first == 7);
    CHECK(traces[1].second.samples[0].first == 60.0);
  }
  SUBCASE("duplicate timestamps keep the first sample") {
    const auto path = tmp.file("d.csv",
                               "5,37.70,-122.40,0,60\n"
                               "5,37.99,-122.99,0,60\n");
    const auto traces = load_mobility_csv(path);
    REQUIRE(traces.size() == 1);
    REQUIRE(traces[0].second.samples.size() == 1);
    CHECK(traces[0].second.samples[0].second.lat == doctest::Approx(37.70));
  }
  SUBCASE("empty file is an error") {
    const auto path = tmp.file("e.csv", "");
    CHECK_THROWS_AS(load_mobility_csv(path), TraceError);
  }
}

TEST_CASE("loaders are lossless: load, write, load is the identity") {
  TempDir tmp;
  const auto spath = tmp.file("s.csv", "0,37.771234,-122.419876\n1,37.78,-122.42\n");
  const auto [stations, servers] = load_station_csv(spath);
  const auto s2path = (tmp.path / "s2.csv").string();
  write_station_csv(s2path, stations);
  const auto [stations2, servers2] = load_station_csv(s2path);
  REQUIRE(stations2.size() == stations.size());
  for (std::size_t i = 0; i < stations.size(); ++i) {
    CHECK(stations2[i].id == stations[i].id);
    CHECK(stations2[i].location.lat == stations[i].location.lat);
    CHECK(stations2[i].location.lng == stations[i].location.lng);
  }

  const auto mpath = tmp.file("m.csv", "3,37.71,-122.41,0,0\n3,37.7223,-122.4331,0,60\n");
  const auto traces = load_mobility_csv(mpath);
  const auto m2path = (tmp.path / "m2.csv").string();
  write_mobility_csv(m2path, traces);
  const auto traces2 = load_mobility_csv(m2path);
  REQUIRE(traces2.size() == traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    CHECK(traces2[i].first == traces[i].first);
    REQUIRE(traces2[i].second.samples.size() == traces[i].second.samples.size());
    for (std::size_t j = 0; j < traces[i].second.samples.size(); ++j) {
      CHECK(traces2[i].second.samples[j].first == traces[i].second.samples[j].first);
      CHECK(traces2[i].second.samples[j].second.lat == traces[i].second.samples[j].second.lat);
      CHECK(traces2[i].second.samples[j].second.lng == traces[i].second.samples[j].second.lng);
    }
  }
}

TEST_CASE("synthetic worlds are reproducible and respect their bounds") {
  WorldGenParams params;
  params.stations = 12;
  params.users = 20;
  params.horizon_intervals = 30;
  params.seed = 42;

  const TraceBundle a = synth_world(params);
  const TraceBundle b = synth_world(params);
  REQUIRE(a.users.size() == 20 + 12 * 2);  // mobile users plus station residents
  REQUIRE(a.stations.size() == 12);
  CHECK(a.servers.size() == 12 + 12);  // primaries plus one spare per station
  int preplaced = 0;
  for (const EdgeService& svc : a.services)
    if (svc.current_server_id) ++preplaced;
  CHECK(preplaced == 12 * 2);  // residents come pre-placed on the primaries
  for (std::size_t u = 0; u < a.users.size(); ++u) {
    REQUIRE(a.users[u].trace.samples.size() == b.users[u].trace.samples.size());
    for (std::size_t i = 0; i < a.users[u].trace.samples.size(); ++i) {
      CHECK(a.users[u].trace.samples[i].first == b.users[u].trace.samples[i].first);
      CHECK(a.users[u].trace.samples[i].second.lat == b.users[u].trace.samples[i].second.lat);
      CHECK(a.users[u].trace.samples[i].second.lng == b.users[u].trace.samples[i].second.lng);
    }
    CHECK(a.services[u].workload_trace == b.services[u].workload_trace);
  }

  // Every trace sample stays inside the square (small projection slack).
  const double limit = params.half_side_m + 1.0;
  for (const MobileUser& u : a.users) {
    for (const auto& [ts, p] : u.trace.samples) {
      CHECK(distance_m(params.center, {params.center.lat, p.lng}) <= limit);
      CHECK(distance_m(params.center, {p.lat, params.center.lng}) <= limit);
    }
  }
  for (const EdgeService& svc : a.services)
    for (double w : svc.workload_trace) {
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
    }

  params.users = 0;
  CHECK_THROWS_AS(synth_world(params), ConfigError);
}

TEST_CASE("densify scales requested MIPS linearly and nothing else") {
  WorldGenParams params;
  params.stations = 3;
  params.users = 6;
  params.horizon_intervals = 5;
  params.seed = 9;
  const TraceBundle base = synth_world(params);

  const TraceBundle same = densify_workloads(base, 1);
  for (std::size_t i = 0; i < base.services.size(); ++i)
    CHECK(same.services[i].requested_mips == base.services[i].requested_mips);

  const TraceBundle doubled = densify_workloads(base, 2);
  double base_total = 0.0, doubled_total = 0.0;
  for (std::size_t i = 0; i < base.services.size(); ++i) {
    CHECK(doubled.services[i].requested_mips == 2.0 * base.services[i].requested_mips);
    CHECK(doubled.services[i].workload_trace == base.services[i].workload_trace);
    base_total += base.services[i].requested_mips;
    doubled_total += doubled.services[i].requested_mips;
  }
  CHECK(doubled_total == doctest::Approx(2.0 * base_total).epsilon(1e-12));
}

TEST_CASE("kmeans handles the degenerate and k=1 cases") {
  SUBCASE("all points identical collapse onto that point") {
    std::vector<std::pair<double, double>> pts(10, {3.0, -4.0});
    const KMeansResult r = kmeans(pts, 3, 1);
    for (const auto& c : r.centers) {
      CHECK(c.first == doctest::Approx(3.0));
      CHECK(c.second == doctest::Approx(-4.0));
    }
  }
  SUBCASE("k=1 gives the mean of all points") {
    std::vector<std::pair<double, double>> pts = {{0, 0}, {2, 0}, {0, 2}, {2, 2}};
    const KMeansResult r = kmeans(pts, 1, 1);
    REQUIRE(r.centers.size() == 1);
    CHECK(r.centers[0].first == doctest::Approx(1.0));
    CHECK(r.centers[0].second == doctest::Approx(1.0));
  }
  SUBCASE("fewer points than clusters is an error") {
    std::vector<std::pair<double, double>> pts = {{0, 0}};
    CHECK_THROWS_AS(kmeans(pts, 2, 1), ConfigError);
  }
}

TEST_CASE("kmeans objective is nonincreasing and seeded runs repeat") {
  Rng rng(77);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 300; ++i) pts.push_back({rng.uniform(-100, 100), rng.uniform(-100, 100)});
  const KMeansResult a = kmeans(pts, 5, 123);
  const KMeansResult b = kmeans(pts, 5, 123);
  CHECK(a.assignment == b.assignment);
  CHECK(a.wcss_history == b.wcss_history);
  for (std::size_t i = 1; i < a.wcss_history.size(); ++i)
    CHECK(a.wcss_history[i] <= a.wcss_history[i - 1] + 1e-9);
}

TEST_CASE("rush hour selection centers on the denser blob") {
  // 3 taxis circle the left blob, 8 the right: the square lands on the right.
  std::vector<std::pair<int, MobilityTrace>> traces;
  const GeoPoint left{37.7, -122.5};
  const GeoPoint right = offset_m(left, 10000.0, 0.0);
  int id = 0;
  for (int i = 0; i < 3; ++i) {
    MobilityTrace t;
    for (int k = 0; k < 10; ++k) t.samples.push_back({k * 60.0, offset_m(left, i * 10.0, 0)});
    traces.emplace_back(id++, t);
  }
  for (int i = 0; i < 8; ++i) {
    MobilityTrace t;
    for (int k = 0; k < 10; ++k)
      t.samples.push_back({k * 60.0, offset_m(right, i * 10.0, -i * 5.0)});
    traces.emplace_back(id++, t);
  }

  std::vector<BaseStation> stations;
  stations.push_back({0, offset_m(left, 100.0, 100.0), 0});
  stations.push_back({1, offset_m(right, -150.0, 50.0), 1});
  stations.push_back({2, offset_m(right, 30000.0, 0.0), 2});  // far outside

  const RushHourSelection sel = kmeans_rush_hour(traces, 2, stations, 11, 2000.0, 300.0, 60.0);
  CHECK(distance_m(sel.center, right) < 1500.0);
  CHECK(sel.station_ids.count(1) == 1);
  CHECK(sel.station_ids.count(0) == 0);
  CHECK(sel.station_ids.count(2) == 0);
  CHECK(sel.user_ids.size() == 8);
}

TEST_CASE("rush hour window lands on the busiest three-hour-equivalent span") {
  // One blob; taxis 0-2 are active during [0, 240] and taxis 3-10 from 300 s
  // on. The earliest 300 s window seeing both groups starts at 60 s.
  std::vector<std::pair<int, MobilityTrace>> traces;
  const GeoPoint blob{37.7, -122.5};
  for (int i = 0; i < 3; ++i) {
    MobilityTrace t;
    for (int k = 0; k <= 4; ++k) t.samples.push_back({k * 60.0, offset_m(blob, i * 10.0, 0)});
    traces.emplace_back(i, t);
  }
  for (int i = 3; i < 11; ++i) {
    MobilityTrace t;
    for (int k = 5; k <= 9; ++k) t.samples.push_back({k * 60.0, offset_m(blob, i * 10.0, 0)});
    traces.emplace_back(i, t);
  }
  std::vector<BaseStation> stations;
  stations.push_back({0, offset_m(blob, 50.0, 50.0), 0});

  const RushHourSelection sel = kmeans_rush_hour(traces, 1, stations, 3, 2000.0, 300.0, 60.0);
  CHECK(sel.window_start_s == 60.0);
  CHECK(sel.window_start_interval == 1);
  CHECK(sel.user_ids.size() == 11);
  CHECK(sel.station_ids.count(0) == 1);
}

TEST_CASE("rush hour extraction trims the bundle to the selection") {
  WorldGenParams params;
  params.stations = 10;
  params.users = 12;
  params.horizon_intervals = 20;
  params.seed = 5;
  TraceBundle bundle = synth_world(params);

  RushHourSelection sel;
  sel.center = params.center;
  sel.half_side_m = params.half_side_m;
  for (int i = 0; i < 5; ++i) sel.station_ids.insert(i);
  for (int u = 0; u < 6; ++u) sel.user_ids.insert(u);
  sel.window_start_s = 300.0;
  sel.window_start_interval = 5;
  sel.window_end_interval = 20;

  const TraceBundle out = extract_rush_hour(bundle, sel);
  CHECK(out.stations.size() == 5);
  CHECK(out.users.size() == 6);
  CHECK(out.services.size() == 6);
  for (const EdgeServer& s : out.servers) CHECK(s.base_station_id < 5);
  for (const MobileUser& u : out.users) CHECK(u.trace.first_timestamp() == 0.0);
}
