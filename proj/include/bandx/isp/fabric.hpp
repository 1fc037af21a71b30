#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "bandx/isp/isp.hpp"

namespace bandx::isp {

// Every ISP of a topology, addressed by network element id.
class Fabric {
 public:
  using KeyFor = std::function<credential::SigningKey(const std::string& isp)>;
  using RngFor = std::function<std::unique_ptr<crypto::RandomSource>(const std::string& isp)>;

  Fabric(Topology topology, const KeyFor& key_for, const RngFor& rng_for, IspConfig config);

  const Topology& topology() const { return topology_; }
  Isp& isp(const std::string& name);
  const Isp& isp(const std::string& name) const;
  Isp& isp_of_ne(const std::string& ne_id);
  const Isp* isp_by_key(const PublicKeyId& key) const;
  std::vector<std::string> isp_names() const;

  std::vector<std::string> audit() const;

 private:
  Topology topology_;
  std::map<std::string, std::unique_ptr<Isp>> isps_;
};

}  // namespace bandx::isp
