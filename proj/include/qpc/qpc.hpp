// qpc.hpp: everything at once
#pragma once

#include "elements.hpp"
#include "gaussian.hpp"
#include "kinetics.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "pfaffian.hpp"
#include "pulse.hpp"
#include "scenario.hpp"
#include "spectrum.hpp"
#include "verify.hpp"
