#include "bandx/harness/setup.hpp"

namespace bandx::harness {

credential::SigningKey WorldSetup::key_for(const std::string& principal) const {
  return credential::SigningKey::derive(std::to_string(seed.value_or(0)) + ":" + principal);
}

}  // namespace bandx::harness
