#pragma once

#include "sddkit/chain.hpp"
#include "sddkit/chebyshev.hpp"
#include "sddkit/elimination.hpp"
#include "sddkit/error.hpp"
#include "sddkit/generators.hpp"
#include "sddkit/graph.hpp"
#include "sddkit/io.hpp"
#include "sddkit/lowstretch.hpp"
#include "sddkit/oracle.hpp"
#include "sddkit/rng.hpp"
#include "sddkit/sdd.hpp"
#include "sddkit/solver.hpp"
#include "sddkit/sparsify.hpp"
#include "sddkit/union_find.hpp"
#include "sddkit/vector_ops.hpp"
