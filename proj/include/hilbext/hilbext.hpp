#pragma once

#include "errors.hpp"
#include "tolerances.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "bundle.hpp"
#include "hilbmod.hpp"
#include "isometry.hpp"
#include "extension.hpp"
#include "invariants/winding.hpp"
#include "invariants/fredholm.hpp"
#include "invariants.hpp"
