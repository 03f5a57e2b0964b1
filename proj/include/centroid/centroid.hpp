#ifndef CENTROID_CENTROID_HPP
#define CENTROID_CENTROID_HPP

#include "centroid/error.hpp"
#include "centroid/specfun.hpp"
#include "centroid/stepfn.hpp"
#include "centroid/zonotope.hpp"
#include "centroid/saddle.hpp"
#include "centroid/reparam.hpp"
#include "centroid/volume.hpp"
#include "centroid/oracle.hpp"
#include "centroid/colorimetry.hpp"

#endif  // CENTROID_CENTROID_HPP
