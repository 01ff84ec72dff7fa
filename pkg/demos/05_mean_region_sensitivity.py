"""Sensitivity of the result to the seed-region size on noisy data.

The node cost is the absolute distance of a sample's gray value to the mean
over a d^3 voxel cube at the seed. On a homogeneous object that mean equals
the interior value, every interior sample costs about zero, and noise decides
where the cut lands: the surface is underdetermined and collapses. When the
cube is large enough to straddle the boundary, the mean falls between the
inside and outside values, the cost dips sharply at the gray-value crossing,
and the cut locks onto the boundary with sub-voxel stability.

This is the documented failure mode behind the phantom-recovery acceptance
criterion, and the knob that controls it.
"""

from gliocut import PhantomSpec, SegmentationParams, dice, generate_phantom, segment
from gliocut.evaluate import analytic_ball_volume_mm3

spec = PhantomSpec(dims=(64, 64, 64), radius_mm=15.0, inside_value=200,
                   outside_value=50, noise_sigma=10.0)
volume, truth = generate_phantom(spec, rng_seed=20100902)
seed = spec.resolved_center()
analytic = analytic_ball_volume_mm3(15.0)
print("phantom: ball r=15 mm, contrast 200/50, gaussian noise sigma=10\n")
print("  d (voxels)   mean gray   dice     volume error")

for d in (5, 11, 21, 31, 41):
    result = segment(volume, seed, SegmentationParams(mean_region_d=d))
    score = dice(result.mask, truth)
    vol_err = (result.volume_mm3 - analytic) / analytic
    print(f"     {d:2d}         {result.mean_gray:6.1f}    {score:.4f}   {vol_err * 100:+6.1f}%")

print("\nSmall d: the mean matches the interior, interior costs vanish, and the")
print("cut collapses to wherever noise is cheapest. Large d: the mean sits")
print("between object and background and the cut tracks the boundary.")
