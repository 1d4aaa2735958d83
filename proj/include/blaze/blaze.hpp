#pragma once

#include "blaze/cluster.hpp"
#include "blaze/dist_hash_map.hpp"
#include "blaze/dist_range.hpp"
#include "blaze/dist_vector.hpp"
#include "blaze/distribute.hpp"
#include "blaze/error.hpp"
#include "blaze/load_file.hpp"
#include "blaze/mapreduce.hpp"
#include "blaze/random.hpp"
#include "blaze/reducers.hpp"
#include "blaze/topk.hpp"
#include "blaze/transport.hpp"
#include "blaze/wire.hpp"
