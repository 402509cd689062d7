#pragma once

#include "wassopt/dro.hpp"
#include "wassopt/error.hpp"
#include "wassopt/flows.hpp"
#include "wassopt/functionals.hpp"
#include "wassopt/gaussian.hpp"
#include "wassopt/kl_ball.hpp"
#include "wassopt/measure.hpp"
#include "wassopt/network_simplex.hpp"
#include "wassopt/optimality.hpp"
#include "wassopt/oracles.hpp"
#include "wassopt/ot.hpp"
#include "wassopt/polyroots.hpp"
#include "wassopt/random.hpp"
#include "wassopt/scalar_field.hpp"
