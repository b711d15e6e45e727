#pragma once

#include "fallnet/config.hpp"
#include "fallnet/dataset_cache.hpp"
#include "fallnet/error.hpp"
#include "fallnet/fall_net.hpp"
#include "fallnet/fall_train.hpp"
#include "fallnet/lifting_data.hpp"
#include "fallnet/lifting_net.hpp"
#include "fallnet/metrics.hpp"
#include "fallnet/nn/adam.hpp"
#include "fallnet/nn/batchnorm.hpp"
#include "fallnet/nn/checkpoint.hpp"
#include "fallnet/nn/conv1d.hpp"
#include "fallnet/nn/elementwise.hpp"
#include "fallnet/nn/grad_check.hpp"
#include "fallnet/nn/loss.hpp"
#include "fallnet/normalization.hpp"
#include "fallnet/report.hpp"
#include "fallnet/ntu_format.hpp"
#include "fallnet/sequence_ops.hpp"
#include "fallnet/skeleton.hpp"
#include "fallnet/synth.hpp"
#include "fallnet/tensor.hpp"
