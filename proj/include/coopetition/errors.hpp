#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace coopetition {

// Every error raised by the engine derives from Error so that callers
// (the CLI in particular) can map the concrete type onto an exit status.
class Error : public std::runtime_error
{
public:
  Error(std::string kind, const std::string &message)
    : std::runtime_error(message), kind_(std::move(kind))
  {}

  const std::string &kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define COOPETITION_DEFINE_ERROR(Name)                                      \
  class Name : public Error                                                 \
  {                                                                         \
  public:                                                                   \
    explicit Name(const std::string &message) : Error(#Name, message) {}    \
  }

COOPETITION_DEFINE_ERROR(InvalidDistribution);
COOPETITION_DEFINE_ERROR(InvalidConfig);
COOPETITION_DEFINE_ERROR(InvalidProfile);
COOPETITION_DEFINE_ERROR(InfeasibleBid);
COOPETITION_DEFINE_ERROR(NoBracket);
COOPETITION_DEFINE_ERROR(NoRootInInterval);
COOPETITION_DEFINE_ERROR(AssumptionViolated);
COOPETITION_DEFINE_ERROR(NonUnimodal);
COOPETITION_DEFINE_ERROR(CertificationFailed);
COOPETITION_DEFINE_ERROR(ConfigError);

#undef COOPETITION_DEFINE_ERROR

}  // namespace coopetition
