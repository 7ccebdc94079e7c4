#pragma once

// Umbrella header for the toolkit: 4-D symplectic maps near a 1-elliptic
// fixed point with a homoclinic orbit -- model construction, linearized
// scattering along the orbit, KAM analysis of the center restriction, and
// the four-transverse-intersection verification on the homoclinic disk.

#include "homscat/center.hpp"
#include "homscat/config.hpp"
#include "homscat/errors.hpp"
#include "homscat/fiber.hpp"
#include "homscat/fixed_point.hpp"
#include "homscat/homoclinic.hpp"
#include "homscat/jet.hpp"
#include "homscat/map.hpp"
#include "homscat/model.hpp"
#include "homscat/normal_form.hpp"
#include "homscat/pipeline.hpp"
#include "homscat/scattering.hpp"
#include "homscat/sigma.hpp"
#include "homscat/types.hpp"
