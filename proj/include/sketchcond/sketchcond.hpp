#pragma once

#include "sketchcond/data_matrix.hpp"
#include "sketchcond/effdim.hpp"
#include "sketchcond/error.hpp"
#include "sketchcond/experiments.hpp"
#include "sketchcond/io.hpp"
#include "sketchcond/kernel.hpp"
#include "sketchcond/leverage.hpp"
#include "sketchcond/losses.hpp"
#include "sketchcond/overestimates.hpp"
#include "sketchcond/preconditioner.hpp"
#include "sketchcond/random.hpp"
#include "sketchcond/ridge_exact.hpp"
#include "sketchcond/sampling.hpp"
#include "sketchcond/sketch_solve.hpp"
#include "sketchcond/solver.hpp"
#include "sketchcond/spectral_check.hpp"
#include "sketchcond/spectrum.hpp"
#include "sketchcond/version.hpp"
