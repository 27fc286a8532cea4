#pragma once

#include "qroof/channels.hpp"
#include "qroof/convexify.hpp"
#include "qroof/ensemble.hpp"
#include "qroof/functional.hpp"
#include "qroof/io.hpp"
#include "qroof/monotones.hpp"
#include "qroof/optim.hpp"
#include "qroof/random.hpp"
#include "qroof/types.hpp"
#include "qroof/verify.hpp"
