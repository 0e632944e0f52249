#pragma once

#include "cohybrid/assigners.hpp"
#include "cohybrid/collab.hpp"
#include "cohybrid/diagnostics.hpp"
#include "cohybrid/error.hpp"
#include "cohybrid/geometry.hpp"
#include "cohybrid/losses.hpp"
#include "cohybrid/matcher.hpp"
#include "cohybrid/matrix.hpp"
#include "cohybrid/priors.hpp"
#include "cohybrid/pipeline.hpp"
#include "cohybrid/scene_io.hpp"
#include "cohybrid/synthetic.hpp"
