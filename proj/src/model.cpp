#include "mecsim/model.hpp"

#include <algorithm>

namespace mecsim {

void World::rebuild_indexes() {
  station_index.clear();
  server_index.clear();
  user_index.clear();
  service_index.clear();
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (!station_index.emplace(stations[i].id, static_cast<int>(i)).second)
      throw ConfigError("duplicate station id " + std::to_string(stations[i].id));
  }
  for (std::size_t i = 0; i < servers.size(); ++i) {
    if (!server_index.emplace(servers[i].id, static_cast<int>(i)).second)
      throw ConfigError("duplicate server id " + std::to_string(servers[i].id));
  }
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (!user_index.emplace(users[i].id, static_cast<int>(i)).second)
      throw ConfigError("duplicate user id " + std::to_string(users[i].id));
  }
  for (std::size_t i = 0; i < services.size(); ++i) {
    if (!service_index.emplace(services[i].id, static_cast<int>(i)).second)
      throw ConfigError("duplicate service id " + std::to_string(services[i].id));
  }
}

double World::requested_mips_on(const EdgeServer& s) const {
  double sum = 0.0;
  for (int sid : s.hosted_service_ids) sum += service(sid).requested_mips;
  return sum;
}

void World::place(int service_id, int server_id) {
  EdgeService& svc = service(service_id);
  if (svc.current_server_id.has_value()) deallocate(service_id);
  server(server_id).hosted_service_ids.insert(service_id);
  svc.current_server_id = server_id;
  svc.ever_placed = true;
}

void World::deallocate(int service_id) {
  EdgeService& svc = service(service_id);
  if (!svc.current_server_id.has_value()) return;
  server(*svc.current_server_id).hosted_service_ids.erase(service_id);
  svc.current_server_id.reset();
}

void World::check_referential_integrity() const {
  for (const BaseStation& bs : stations) {
    if (!server_index.count(bs.edge_server_id))
      throw ConfigError("station " + std::to_string(bs.id) + " references missing server");
  }
  std::unordered_map<int, int> placements;
  for (const EdgeServer& s : servers) {
    if (!station_index.count(s.base_station_id))
      throw ConfigError("server " + std::to_string(s.id) + " references missing station");
    for (int sid : s.hosted_service_ids) {
      if (!service_index.count(sid))
        throw ConfigError("server " + std::to_string(s.id) + " hosts missing service");
      auto [it, inserted] = placements.emplace(sid, s.id);
      if (!inserted)
        throw ConfigError("service " + std::to_string(sid) + " placed on two servers");
      const EdgeService& svc = service(sid);
      if (!svc.current_server_id || *svc.current_server_id != s.id)
        throw ConfigError("service " + std::to_string(sid) +
                          " placement out of sync with hosted set");
    }
  }
  for (const EdgeService& svc : services) {
    if (!user_index.count(svc.user_id))
      throw ConfigError("service " + std::to_string(svc.id) + " references missing user");
    if (svc.current_server_id && !placements.count(svc.id))
      throw ConfigError("service " + std::to_string(svc.id) +
                        " claims a server that does not host it");
  }
  for (const MobileUser& u : users) {
    if (!service_index.count(u.service_id))
      throw ConfigError("user " + std::to_string(u.id) + " references missing service");
  }
}

double server_cpu_utilization(const EdgeServer& server, const World& world, int interval) {
  if (server.capacity_mips <= 0.0)
    throw ConfigError("server " + std::to_string(server.id) + " has non-positive capacity");
  double used = 0.0;
  for (int sid : server.hosted_service_ids) {
    const EdgeService& svc = world.service(sid);
    if (interval < 0 || interval >= static_cast<int>(svc.workload_trace.size()))
      throw ConfigError("interval " + std::to_string(interval) +
                        " outside workload trace of service " + std::to_string(sid));
    used += svc.workload_trace[interval] * svc.requested_mips;
  }
  return std::clamp(used / server.capacity_mips, 0.0, 1.5);
}

}  // namespace mecsim
