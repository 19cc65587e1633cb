#pragma once

#include "vec.hpp"
#include "geom.hpp"
#include "model.hpp"
#include "obstruction.hpp"
#include "straighten.hpp"
#include "trees.hpp"
#include "convexify.hpp"
#include "generate.hpp"
#include "io.hpp"
#include "render.hpp"
