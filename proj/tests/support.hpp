#ifndef OTALINK_TESTS_SUPPORT_HPP
#define OTALINK_TESTS_SUPPORT_HPP

#include <doctest.h>

#include <optional>

#include "otalink/error.hpp"

/// Error code thrown by `fn`, or nullopt when it returns normally.
template <typename Fn>
std::optional<otalink::Errc> code_of(Fn&& fn) {
  try {
    fn();
  } catch (const otalink::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

#endif
