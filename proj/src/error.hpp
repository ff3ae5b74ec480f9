// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace exp4fuse {

enum class ErrorCode {
    InvalidArgument = 1,
    Io = 2,
    Parse = 3,
    Llm = 4,
    Internal = 5,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

/// Raised by LLM clients. Retryable errors (transport failures, non-2xx
/// statuses) are retried with backoff by the generator before surfacing.
class LlmError : public Error {
  public:
    LlmError(const std::string& message, bool retryable)
        : Error(ErrorCode::Llm, message), retryable_(retryable) {}

    bool retryable() const noexcept { return retryable_; }

  private:
    bool retryable_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace exp4fuse
