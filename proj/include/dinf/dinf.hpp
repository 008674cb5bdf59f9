#pragma once

#include "dinf/geometric.hpp"
#include "dinf/informativity.hpp"
#include "dinf/io.hpp"
#include "dinf/linalg.hpp"
#include "dinf/oracle.hpp"
#include "dinf/pencil.hpp"
#include "dinf/problem.hpp"
#include "dinf/properties.hpp"
