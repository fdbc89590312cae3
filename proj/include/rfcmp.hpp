#pragma once

#include "rfcmp/types.hpp"
#include "rfcmp/mesh.hpp"
#include "rfcmp/quadrature.hpp"
#include "rfcmp/discretization.hpp"
#include "rfcmp/potentials.hpp"
#include "rfcmp/efie.hpp"
#include "rfcmp/quasi_helmholtz.hpp"
#include "rfcmp/krylov.hpp"
#include "rfcmp/rf_preconditioner.hpp"
#include "rfcmp/postprocess.hpp"
#include "rfcmp/io.hpp"
#include "rfcmp/run_config.hpp"
#include "rfcmp/experiments.hpp"
