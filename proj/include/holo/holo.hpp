// Umbrella header for the holo library.
#pragma once

#include "holo/autograd.hpp"
#include "holo/errors.hpp"
#include "holo/field.hpp"
#include "holo/imageio.hpp"
#include "holo/loss.hpp"
#include "holo/optim.hpp"
#include "holo/pipeline.hpp"
#include "holo/types.hpp"
