#pragma once

#include "qcls/core.hpp"
#include "qcls/io.hpp"
#include "qcls/linalg.hpp"
#include "qcls/oracle.hpp"
#include "qcls/problem.hpp"
#include "qcls/psd.hpp"
#include "qcls/secular.hpp"
#include "qcls/solution_set.hpp"
#include "qcls/solve.hpp"
#include "qcls/transforms.hpp"
