#pragma once

#include "cle/reference.hpp"

namespace oracle = cle::reference;
