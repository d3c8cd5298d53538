#include "splatcal/gaussian.hpp"

#include <set>

namespace splatcal {

namespace {

void validate_view(const Camera& cam, const Image& img, const char* split, size_t idx) {
  cam.validate();
  require(img.width == cam.width && img.height == cam.height && img.channels == 3,
          "%s view %zu: image %dx%dx%d does not match camera %dx%d", split, idx, img.width,
          img.height, img.channels, cam.width, cam.height);
  for (double v : img.data)
    require(v >= 0.0 && v <= 1.0 && std::isfinite(v), "%s view %zu: channel value out of [0,1]",
            split, idx);
}

}  // namespace

void Scene::validate() const {
  require(!gaussians.empty(), "empty gaussian set");
  require(train_cameras.size() == train_images.size(), "train camera/image count mismatch");
  require(test_cameras.size() == test_images.size(), "test camera/image count mismatch");
  for (size_t i = 0; i < gaussians.size(); ++i) {
    const auto& g = gaussians[i];
    require(g.finite(), "gaussian %zu: non-finite parameter", i);
    require(g.rotation.norm() > 1e-6, "gaussian %zu: degenerate rotation", i);
    require(g.dcp_score >= 0.0, "gaussian %zu: negative dcp score", i);
  }
  for (size_t i = 0; i < train_cameras.size(); ++i)
    validate_view(train_cameras[i], train_images[i], "train", i);
  for (size_t i = 0; i < test_cameras.size(); ++i)
    validate_view(test_cameras[i], test_images[i], "test", i);

  // ids key the ground-truth image files, so they must not collide
  std::set<int> ids;
  for (const auto* cams : {&train_cameras, &test_cameras})
    for (const auto& c : *cams)
      require(ids.insert(c.id).second, "duplicate camera id %d", c.id);
}

}  // namespace splatcal
