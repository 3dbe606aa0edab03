#pragma once

#include <functional>

#include <gtest/gtest.h>

#include "cfdx/error.hpp"

namespace support {

// Kind of the cfdx::Error raised by `fn`; records a failure if none is thrown.
inline cfdx::ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const cfdx::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected cfdx::Error";
  return cfdx::ErrorKind::InvalidArgument;
}

}  // namespace support
