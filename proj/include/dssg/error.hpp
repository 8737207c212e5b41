#pragma once

#include <stdexcept>
#include <string>

namespace dssg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DSSG_DEFINE_ERROR(Name)              \
  class Name : public Error {                \
   public:                                   \
    explicit Name(const std::string& what)   \
        : Error(std::string(#Name ": ") + what) {} \
  }

DSSG_DEFINE_ERROR(InvalidEdge);
DSSG_DEFINE_ERROR(NotConnected);
DSSG_DEFINE_ERROR(DisconnectedAfterRetries);
DSSG_DEFINE_ERROR(AssumptionViolated);
DSSG_DEFINE_ERROR(DimensionMismatch);
DSSG_DEFINE_ERROR(UnknownProblem);
DSSG_DEFINE_ERROR(BadParams);
DSSG_DEFINE_ERROR(BoundInfeasible);
DSSG_DEFINE_ERROR(OracleFailure);
DSSG_DEFINE_ERROR(WindowOutOfRange);
DSSG_DEFINE_ERROR(SchemaMismatch);
DSSG_DEFINE_ERROR(IoError);
DSSG_DEFINE_ERROR(ConfigError);
DSSG_DEFINE_ERROR(FormatError);

#undef DSSG_DEFINE_ERROR

}  // namespace dssg
