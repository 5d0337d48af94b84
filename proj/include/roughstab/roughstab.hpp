#pragma once

// Umbrella header.
#include "roughstab/core.hpp"
#include "roughstab/paths.hpp"
#include "roughstab/fbm.hpp"
#include "roughstab/norms.hpp"
#include "roughstab/greedy.hpp"
#include "roughstab/young.hpp"
#include "roughstab/rough.hpp"
#include "roughstab/stability.hpp"
