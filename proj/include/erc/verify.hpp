#pragma once

#include "erc/verify/export.hpp"
#include "erc/verify/runtime_check.hpp"
#include "erc/verify/sampler.hpp"
#include "erc/verify/wp.hpp"
