#pragma once

#include "dmst/types.hpp"
#include "dmst/varint.hpp"
#include "dmst/transport.hpp"
#include "dmst/grid_alltoall.hpp"
#include "dmst/sorting.hpp"
#include "dmst/graph.hpp"
#include "dmst/edge_io.hpp"
#include "dmst/labels.hpp"
#include "dmst/local_preproc.hpp"
#include "dmst/parent_array.hpp"
#include "dmst/boruvka.hpp"
#include "dmst/filter_boruvka.hpp"
#include "dmst/generators.hpp"
#include "dmst/oracle.hpp"
