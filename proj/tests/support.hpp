#pragma once

#include <gtest/gtest.h>

#include <string>

#include "facelve/error.hpp"

namespace facelve::test {

// Runs fn and reports which library error it raised.
template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no facelve::Error thrown";
  return ErrorCode::Io;
}

template <typename Fn>
std::string field_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.field();
  }
  ADD_FAILURE() << "no facelve::Error thrown";
  return {};
}

}  // namespace facelve::test
