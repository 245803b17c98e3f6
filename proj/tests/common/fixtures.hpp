#ifndef DIAGORB_TESTS_FIXTURES_HPP
#define DIAGORB_TESTS_FIXTURES_HPP

#include "diagorb/systems.hpp"

namespace fixture {

/// Z_4 with uniform weights, T_1 x = x + 1, T_2 x = x + 2.
inline diagorb::FiniteSystem z4()
{
    using diagorb::FiniteMap;
    return diagorb::FiniteSystem(diagorb::FiniteSpace(4), {FiniteMap::cyclic_shift(4, 1), FiniteMap::cyclic_shift(4, 2)});
}

} // namespace fixture

#endif
