#pragma once

#include "codegen.hpp"
#include "levelset.hpp"
#include "rewrite.hpp"
#include "solver.hpp"
#include "sparse_io.hpp"
#include "strategy.hpp"
