#ifndef KCANON_KCANON_HPP_
#define KCANON_KCANON_HPP_

#include "kcanon/error.hpp"
#include "kcanon/graph.hpp"
#include "kcanon/solver.hpp"
#include "kcanon/signatures.hpp"
#include "kcanon/oracle.hpp"

#endif // KCANON_KCANON_HPP_
