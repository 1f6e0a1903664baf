#pragma once

#include "allocation.hpp"
#include "clustering.hpp"
#include "cost.hpp"
#include "init.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "segmentation.hpp"
#include "types.hpp"
