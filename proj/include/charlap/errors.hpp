#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace charlap {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define CHARLAP_DEFINE_ERROR(Name)                                            \
  class Name : public Error {                                                 \
  public:                                                                     \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {}      \
  }

CHARLAP_DEFINE_ERROR(NonSmoothDerivative);
CHARLAP_DEFINE_ERROR(UnboundLeaf);
CHARLAP_DEFINE_ERROR(NonFinite);
CHARLAP_DEFINE_ERROR(CoframeMismatch);
CHARLAP_DEFINE_ERROR(DegenerateMetric);
CHARLAP_DEFINE_ERROR(NotComplexScenario);
CHARLAP_DEFINE_ERROR(FrameNotInvertible);
CHARLAP_DEFINE_ERROR(RankDrop);
CHARLAP_DEFINE_ERROR(OrderExceedsOperator);
CHARLAP_DEFINE_ERROR(WrongDistribution);
CHARLAP_DEFINE_ERROR(ValidationError);
CHARLAP_DEFINE_ERROR(KindMismatch);
CHARLAP_DEFINE_ERROR(QuadratureUnstable);
CHARLAP_DEFINE_ERROR(JetOrderExhausted);

#undef CHARLAP_DEFINE_ERROR

/// Iterated brackets still growing at the depth limit; carries the ranks
/// reached so far.
class MaxDepthExceeded : public Error {
public:
  MaxDepthExceeded(const std::string& what, std::vector<int> ranks)
      : Error("MaxDepthExceeded: " + what), ranks_(std::move(ranks)) {}
  const std::vector<int>& ranks() const { return ranks_; }

private:
  std::vector<int> ranks_;
};

/// Parse failure with the byte offset where it was detected.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t position)
      : Error("ParseError at " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

}  // namespace charlap
