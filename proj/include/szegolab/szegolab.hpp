#pragma once

#include "szegolab/asymptotics.hpp"
#include "szegolab/core.hpp"
#include "szegolab/cutoff.hpp"
#include "szegolab/experiment.hpp"
#include "szegolab/hardy.hpp"
#include "szegolab/hermitian.hpp"
#include "szegolab/lattice.hpp"
#include "szegolab/model.hpp"
#include "szegolab/quadrature.hpp"
#include "szegolab/sphere_geometry.hpp"
