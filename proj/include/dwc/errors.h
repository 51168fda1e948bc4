#ifndef DWC_ERRORS_H_
#define DWC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dwc {

enum class ErrorCode {
  kIo,
  kConfig,
  kFormat,
  kSchema,
  kEmptyUsage,
  kEmptyDataset,
  kUnknownSignature,
  kUnknownEntity,
  kMetric,
  kDivergence,
};

const char *ErrorCodeName(ErrorCode code);

// All library failures are reported as dwc::Error carrying a category code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Process exit status for an error category: 2 usage/IO, 3 data, 4 numeric.
int ExitCodeFor(ErrorCode code);

}  // namespace dwc

#endif  // DWC_ERRORS_H_
