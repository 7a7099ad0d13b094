#pragma once

#include "doctest.h"
#include "qathermo/error.hpp"

#define CHECK_ERRC(expr, expected)                                                     \
  do {                                                                                 \
    try {                                                                              \
      (void)(expr);                                                                    \
      FAIL_CHECK("expected error " << qathermo::errc_name(expected) << ", got none");  \
    } catch (const qathermo::Error& e_) {                                              \
      CHECK_MESSAGE(e_.code() == (expected), "got " << qathermo::errc_name(e_.code())  \
                                                    << ": " << e_.what());             \
    }                                                                                  \
  } while (0)
