#pragma once

#include "isarforge/core.hpp"
#include "isarforge/mesh.hpp"
#include "isarforge/vehicles.hpp"
#include "isarforge/kinematics.hpp"
#include "isarforge/radar.hpp"
#include "isarforge/fft.hpp"
#include "isarforge/echo.hpp"
#include "isarforge/imaging.hpp"
#include "isarforge/clutter.hpp"
#include "isarforge/image_io.hpp"
#include "isarforge/config.hpp"
#include "isarforge/datagen.hpp"
