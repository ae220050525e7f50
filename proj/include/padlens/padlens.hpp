#ifndef PADLENS_PADLENS_HPP
#define PADLENS_PADLENS_HPP

#include "padlens/analysis.hpp"
#include "padlens/convarith.hpp"
#include "padlens/engine.hpp"
#include "padlens/foveation.hpp"
#include "padlens/io.hpp"
#include "padlens/netspec.hpp"
#include "padlens/padding.hpp"
#include "padlens/tensor.hpp"

#endif
