#pragma once

// The example systems shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "chainposet/systems.hpp"

namespace chainposet::fixtures {

struct NamedSystem {
  std::string name;
  SystemSpec spec;
};

inline std::vector<NamedSystem> bundled_systems() {
  std::vector<NamedSystem> out;
  out.push_back({"identity", make_identity()});
  out.push_back({"square", make_square()});
  for (const char* lambda : {"2", "3", "4", "w", "w+1", "w*2", "w^2"})
    out.push_back({std::string("f_") + lambda, make_ordinal_map(parse_ordinal(lambda))});
  for (int depth = 1; depth <= 3; ++depth)
    out.push_back({"cantor_" + std::to_string(depth), make_cantor_example(depth)});
  for (auto variant : {DenseVariant::WithMax, DenseVariant::NoMax, DenseVariant::OpenInterval})
    for (int depth = 1; depth <= 3; ++depth)
      out.push_back({"dense_" + to_string(variant) + "_" + std::to_string(depth), make_dense_blocks(depth, variant)});
  const PLHomeo h({{make_rational(0), make_rational(0)}, {make_rational(1, 3), make_rational(1, 2)},
                   {make_rational(1), make_rational(1)}});
  out.push_back({"conjugated_f_2", conjugate(make_ordinal_map(Ordinal::finite(2)), h)});
  return out;
}

}  // namespace chainposet::fixtures
