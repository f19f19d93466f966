#pragma once

// Hand-built CIFAR-10 binary records: one label byte then 3072 pixel bytes
// (red plane, green plane, blue plane; 32x32 each).

#include <string>

namespace dshgan::testing {

inline std::string cifar_record(unsigned char label, unsigned char first, unsigned char second, unsigned salt) {
  std::string r(3073, '\0');
  r[0] = static_cast<char>(label);
  for (unsigned i = 1; i < 3073; ++i) r[i] = static_cast<char>((i * 7 + salt) % 256);
  r[1] = static_cast<char>(first);
  r[2] = static_cast<char>(second);
  return r;
}

// Labels 3 and 7; the first record's first pixels are 0 and 255.
inline std::string cifar_fixture() { return cifar_record(3, 0, 255, 1) + cifar_record(7, 255, 0, 5); }

}  // namespace dshgan::testing
