#include "lanecarto/camera.hpp"

namespace lanecarto {

CameraModel CameraModel::forward_facing(double fx, double fy, double cx, double cy,
                                        const Vec3& position_in_vehicle) {
  CameraModel cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  // camera +z -> vehicle +x, camera +x -> vehicle -y, camera +y -> vehicle -z
  cam.rotation = Mat3::from_rows({0, 0, 1}, {-1, 0, 0}, {0, -1, 0});
  cam.translation = position_in_vehicle;
  return cam;
}

}  // namespace lanecarto
