#pragma once

#include <map>
#include <memory>
#include <string>

#include "bandx/harness/envelope.hpp"
#include "bandx/harness/setup.hpp"
#include "bandx/harness/transport.hpp"
#include "bandx/isp/fabric.hpp"
#include "bandx/market/repository.hpp"
#include "bandx/payments/settlement.hpp"

namespace bandx::harness {

// A role's state machine behind the envelope protocol. Both transports call
// handle(); it never throws.
class Service {
 public:
  explicit Service(std::string role) : role_(std::move(role)) {}
  virtual ~Service() = default;

  const std::string& role() const { return role_; }
  SimTime now() const { return now_; }
  // Startup clock; unlike CLOCK-SET it sends no reply and takes no sequence number.
  void set_clock(SimTime t) { now_ = t; }
  Envelope handle(const Envelope& request);

 protected:
  // Returns the reply type and fills `out`; throws bandx::Error to refuse.
  virtual std::string dispatch(const std::string& type, const Payload& in, Payload& out) = 0;
  virtual void report(Payload& out) const = 0;

 private:
  std::string role_;
  SimTime now_;
  std::uint64_t seq_ = 0;
};

class ClearinghouseService final : public Service {
 public:
  explicit ClearinghouseService(const WorldSetup& setup);

 protected:
  std::string dispatch(const std::string& type, const Payload& in, Payload& out) override;
  void report(Payload& out) const override;

 private:
  market::OfferRepository repo_;
};

class GuarantorService final : public Service {
 public:
  explicit GuarantorService(const WorldSetup& setup);

 protected:
  std::string dispatch(const std::string& type, const Payload& in, Payload& out) override;
  void report(Payload& out) const override;

 private:
  std::map<std::string, credential::SigningKey> keys_;
  std::size_t issued_ = 0;
};

class CscService final : public Service {
 public:
  explicit CscService(const WorldSetup& setup);
  const payments::SettlementCenter& center() const { return *center_; }

 protected:
  std::string dispatch(const std::string& type, const Payload& in, Payload& out) override;
  void report(Payload& out) const override;

 private:
  std::unique_ptr<payments::SettlementCenter> center_;
};

// Hosts every ISP of the topology. Deposits go to the CSC through `csc`.
class IspService final : public Service {
 public:
  IspService(const WorldSetup& setup, Transport& csc);
  const isp::Fabric& fabric() const { return *fabric_; }

 protected:
  std::string dispatch(const std::string& type, const Payload& in, Payload& out) override;
  void report(Payload& out) const override;

 private:
  std::unique_ptr<isp::Fabric> fabric_;
  Client csc_;
};

std::unique_ptr<Service> make_service(const std::string& role, const WorldSetup& setup, Transport* csc);

}  // namespace bandx::harness
