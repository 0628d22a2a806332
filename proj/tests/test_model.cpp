#include <doctest.h>

#include "mecsim/model.hpp"

using namespace mecsim;

namespace {

World tiny_world(double capacity_mips, std::vector<std::pair<double, double>> services) {
  // services: (requested_mips, flat workload fraction)
  World w;
  BaseStation bs;
  bs.id = 0;
  bs.edge_server_id = 0;
  w.stations.push_back(bs);

  EdgeServer server;
  server.id = 0;
  server.base_station_id = 0;
  server.capacity_mips = capacity_mips;
  w.servers.push_back(server);

  int next = 0;
  for (const auto& [mips, load] : services) {
    EdgeService svc;
    svc.id = next;
    svc.user_id = next;
    svc.requested_mips = mips;
    svc.workload_trace = {load, load};
    MobileUser user;
    user.id = next;
    user.service_id = next;
    user.trace.samples = {{0.0, {0.0, 0.0}}};
    w.services.push_back(svc);
    w.users.push_back(user);
    ++next;
  }
  w.rebuild_indexes();
  for (int i = 0; i < next; ++i) w.place(i, 0);
  return w;
}

}  // namespace

TEST_CASE("utilization of an empty server is zero") {
  World w = tiny_world(4000.0, {});
  CHECK(server_cpu_utilization(w.servers[0], w, 0) == 0.0);
}

TEST_CASE("utilization is demand times workload over capacity") {
  World w = tiny_world(4000.0, {{2000.0, 0.5}});
  CHECK(server_cpu_utilization(w.servers[0], w, 0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("utilization clamps at the reporting ceiling") {
  // 1000*1.0 + 3000*1.0 on a 2000 MIPS server = 2.0 raw, clamped to 1.5.
  World w = tiny_world(2000.0, {{1000.0, 1.0}, {3000.0, 1.0}});
  CHECK(server_cpu_utilization(w.servers[0], w, 0) == 1.5);
}

TEST_CASE("utilization is pure: repeated calls identical") {
  World w = tiny_world(4000.0, {{2000.0, 0.7}, {1500.0, 0.2}});
  const double a = server_cpu_utilization(w.servers[0], w, 1);
  const double b = server_cpu_utilization(w.servers[0], w, 1);
  CHECK(a == b);
}

TEST_CASE("unknown hosted service id is a configuration error") {
  World w = tiny_world(4000.0, {{2000.0, 0.5}});
  w.servers[0].hosted_service_ids.insert(999);
  CHECK_THROWS_AS(server_cpu_utilization(w.servers[0], w, 0), ConfigError);
  CHECK_THROWS_AS(w.check_referential_integrity(), ConfigError);
}

TEST_CASE("placement keeps a service on at most one server") {
  World w = tiny_world(4000.0, {{2000.0, 0.5}});
  EdgeServer other;
  other.id = 1;
  other.base_station_id = 0;
  other.capacity_mips = 4000.0;
  w.servers.push_back(other);
  w.rebuild_indexes();

  w.place(0, 1);  // move from 0 to 1
  CHECK(w.server(0).hosted_service_ids.empty());
  CHECK(w.server(1).hosted_service_ids.count(0) == 1);
  CHECK(*w.service(0).current_server_id == 1);
  w.check_referential_integrity();

  w.deallocate(0);
  CHECK(!w.service(0).current_server_id.has_value());
  CHECK(w.server(1).hosted_service_ids.empty());
  w.check_referential_integrity();
}

TEST_CASE("admission cap compares requested MIPS against scaled capacity") {
  World w = tiny_world(2000.0, {{3000.0, 0.1}});
  EdgeService incoming;
  incoming.id = 7;
  incoming.user_id = 0;
  incoming.requested_mips = 1000.0;
  CHECK(w.admissible(w.servers[0], incoming, 2.0));   // 3000+1000 <= 4000
  incoming.requested_mips = 1000.5;
  CHECK(!w.admissible(w.servers[0], incoming, 2.0));  // 4000.5 > 4000
}

TEST_CASE("duplicate ids are rejected") {
  World w = tiny_world(2000.0, {{1000.0, 0.1}});
  EdgeServer dup;
  dup.id = 0;
  dup.base_station_id = 0;
  dup.capacity_mips = 1.0;
  w.servers.push_back(dup);
  CHECK_THROWS_AS(w.rebuild_indexes(), ConfigError);
}

TEST_CASE("mobility trace holds the previous sample between samples") {
  MobilityTrace trace;
  trace.samples = {{0.0, {1.0, 1.0}}, {60.0, {2.0, 2.0}}, {120.0, {3.0, 3.0}}};
  CHECK(trace.position_at(0.0).lat == 1.0);
  CHECK(trace.position_at(59.9).lat == 1.0);
  CHECK(trace.position_at(60.0).lat == 2.0);
  CHECK(trace.position_at(119.0).lat == 2.0);
  CHECK(trace.position_at(500.0).lat == 3.0);
  CHECK(trace.position_at(-5.0).lat == 1.0);  // before the first sample
}

TEST_CASE("config validation rejects inverted link delay range") {
  SimConfig cfg;
  cfg.link_delay_min_ms = 50.0;
  cfg.link_delay_max_ms = 5.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
