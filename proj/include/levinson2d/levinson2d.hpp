#pragma once

#include "levinson2d/errors.hpp"
#include "levinson2d/special_functions.hpp"
#include "levinson2d/potentials.hpp"
#include "levinson2d/radial_solver.hpp"
#include "levinson2d/scattering.hpp"
#include "levinson2d/spectrum.hpp"
#include "levinson2d/levinson.hpp"
#include "levinson2d/config.hpp"
#include "levinson2d/report.hpp"
#include "levinson2d/commands.hpp"
