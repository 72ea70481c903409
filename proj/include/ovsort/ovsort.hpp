#pragma once

#include "ovsort/base_sort.hpp"
#include "ovsort/errors.hpp"
#include "ovsort/keyfile.hpp"
#include "ovsort/keys.hpp"
#include "ovsort/multiway_merge.hpp"
#include "ovsort/parallel.hpp"
#include "ovsort/partition.hpp"
#include "ovsort/pipeline.hpp"
#include "ovsort/rng.hpp"
