#pragma once

#include <stdexcept>
#include <string>

namespace qfilm {

// Process exit codes used by the CLI.
enum class ExitCode : int {
  kSuccess = 0,
  kConfig = 2,
  kNumerical = 3,
  kIncompleteProtocol = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kNumerical; }
  virtual const char* kind() const noexcept { return "Error"; }
};

#define QFILM_DECLARE_ERROR(Name, Code)                                  \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    ExitCode exit_code() const noexcept override { return Code; }        \
    const char* kind() const noexcept override { return #Name; }         \
  }

QFILM_DECLARE_ERROR(PreconditionError, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(ZeroAmplitude, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(PoorFit, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(NotNormalized, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(OutOfRange, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(InvalidDensityMatrix, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(DegenerateTop, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(IncompleteProtocol, ExitCode::kIncompleteProtocol);
QFILM_DECLARE_ERROR(SingularFit, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(FitFailure, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(InvalidState, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(GridTooNarrow, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(AsymmetricSpectrum, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(TotalInternalReflection, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(TooFewBins, ExitCode::kNumerical);
QFILM_DECLARE_ERROR(ConfigError, ExitCode::kConfig);

#undef QFILM_DECLARE_ERROR

// Wraps an error raised inside the end-to-end pipeline with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error("[" + stage + "] " + inner.what()),
        stage_(std::move(stage)),
        code_(inner.exit_code()),
        inner_kind_(inner.kind()) {}

  ExitCode exit_code() const noexcept override { return code_; }
  const char* kind() const noexcept override { return inner_kind_.c_str(); }
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
  ExitCode code_;
  std::string inner_kind_;
};

}  // namespace qfilm
