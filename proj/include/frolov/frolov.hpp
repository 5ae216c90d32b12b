#pragma once

#include "frolov/errors.hpp"
#include "frolov/eft.hpp"
#include "frolov/matrix.hpp"
#include "frolov/lll.hpp"
#include "frolov/generator.hpp"
#include "frolov/enumeration.hpp"
#include "frolov/dual.hpp"
#include "frolov/testfns.hpp"
#include "frolov/cubature.hpp"
#include "frolov/fooling.hpp"
#include "frolov/io.hpp"
