#include "bandx/isp/fabric.hpp"

#include "bandx/common/error.hpp"

namespace bandx::isp {

Fabric::Fabric(Topology topology, const KeyFor& key_for, const RngFor& rng_for, IspConfig config)
    : topology_(std::move(topology)) {
  std::map<std::string, std::string> directory;
  for (const auto& name : topology_.isps) {
    auto isp = std::make_unique<Isp>(name, key_for(name), topology_, config, rng_for(name));
    directory[isp->key_id().str()] = name;
    isps_[name] = std::move(isp);
  }
  for (auto& [name, isp] : isps_) isp->set_directory(directory);
}

Isp& Fabric::isp(const std::string& name) {
  auto it = isps_.find(name);
  if (it == isps_.end()) throw Error(ErrorCode::BadRequest, "unknown ISP " + name);
  return *it->second;
}

const Isp& Fabric::isp(const std::string& name) const {
  auto it = isps_.find(name);
  if (it == isps_.end()) throw Error(ErrorCode::BadRequest, "unknown ISP " + name);
  return *it->second;
}

Isp& Fabric::isp_of_ne(const std::string& ne_id) {
  const NeSpec* ne = topology_.find_ne(ne_id);
  if (!ne) throw Error(ErrorCode::BadRequest, "unknown network element " + ne_id);
  return isp(ne->isp);
}

const Isp* Fabric::isp_by_key(const PublicKeyId& key) const {
  for (const auto& [name, isp] : isps_)
    if (isp->key_id() == key) return isp.get();
  return nullptr;
}

std::vector<std::string> Fabric::isp_names() const {
  std::vector<std::string> out;
  for (const auto& [name, isp] : isps_) out.push_back(name);
  return out;
}

std::vector<std::string> Fabric::audit() const {
  std::vector<std::string> out;
  for (const auto& [name, isp] : isps_)
    for (auto& p : isp->audit()) out.push_back(name + ": " + p);
  return out;
}

}  // namespace bandx::isp
