import math

import numpy as np
import pytest

from quadkit.stability import (
    STABILITY_FEATURE_NAMES,
    CentroidalState,
    Contact,
    ContactSet,
    FeasibleRegion,
    feasible_region,
    icp,
    margin_record,
    signed_distance,
    stability_margin,
    support_lp,
)

from oracles import feasibility_grid, point_feasible, polygon_signed_distance


def flat_contacts(points, mu=0.6, f_max=math.inf):
    return ContactSet(tuple(Contact((x, y, 0.0), friction_mu=mu, f_max=f_max)
                            for x, y in points))


class TestTypes:
    def test_normal_must_be_unit(self):
        with pytest.raises(ValueError, match="unit"):
            Contact((0, 0, 0), normal=(0, 0, 2.0))

    def test_negative_friction_rejected(self):
        with pytest.raises(ValueError):
            Contact((0, 0, 0), friction_mu=-0.1)

    def test_duplicate_positions_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            ContactSet((Contact((0, 0, 0)), Contact((0, 0, 0))))

    def test_five_contacts_rejected(self):
        with pytest.raises(ValueError):
            ContactSet(tuple(Contact((i, 0, 0)) for i in range(5)))

    def test_state_normalizes_quaternion(self):
        state = CentroidalState(base_orientation=(2.0, 0.0, 0.0, 0.0))
        assert np.allclose(state.base_orientation, [1, 0, 0, 0])

    def test_vertical_axis_identity_orientation(self):
        assert np.allclose(CentroidalState().vertical_axis(), [0, 0, 1])

    def test_vertical_axis_quarter_roll(self):
        # 90 degree roll about x: world z maps to -y in the base frame
        q = (math.cos(math.pi / 4), math.sin(math.pi / 4), 0.0, 0.0)
        axis = CentroidalState(base_orientation=q).vertical_axis()
        assert np.allclose(axis, [0.0, 1.0, 0.0], atol=1e-12) or \
            np.allclose(axis, [0.0, -1.0, 0.0], atol=1e-12)


class TestIcp:
    def test_zero_velocity_fixed_point(self):
        contacts = flat_contacts([(0, 0)])
        state = CentroidalState(com_position=(0.2, -0.1, 0.4))
        assert np.allclose(icp(state, contacts), [0.2, -0.1])

    def test_forward_velocity_value(self):
        contacts = flat_contacts([(0, 0)])
        state = CentroidalState(com_position=(0, 0, 0.5), com_velocity=(0.3, 0, 0))
        expected = 0.3 * math.sqrt(0.5 / 9.81)
        assert np.allclose(icp(state, contacts), [expected, 0.0])
        assert expected == pytest.approx(0.0677, abs=5e-4)

    def test_velocity_sign_flip_reflects(self):
        contacts = flat_contacts([(0, 0)])
        fwd = icp(CentroidalState(com_position=(0, 0, 0.5), com_velocity=(0.2, 0.1, 0)), contacts)
        back = icp(CentroidalState(com_position=(0, 0, 0.5), com_velocity=(-0.2, -0.1, 0)), contacts)
        assert np.allclose(fwd, -back)

    def test_nonpositive_height_rejected(self):
        contacts = flat_contacts([(0, 0)])
        with pytest.raises(ValueError, match="height"):
            icp(CentroidalState(com_position=(0, 0, -0.1)), contacts)


class TestSupportLp:
    def test_single_contact_unique_point(self):
        contacts = flat_contacts([(0.3, -0.2)], mu=0.8)
        state = CentroidalState(com_position=(0.3, -0.2, 0.5))
        for direction in [(1, 0), (0, 1), (-0.6, 0.8)]:
            result = support_lp(contacts, state, direction)
            assert result.feasible
            # closed-form: equilibrium point sits under the contact
            assert np.allclose(result.point, [0.3, -0.2], atol=1e-8)

    def test_single_contact_infeasible_when_gravity_outside_cone(self):
        contact = Contact((0, 0, 0), normal=(math.sin(1.0), 0, math.cos(1.0)),
                          friction_mu=0.1)
        state = CentroidalState(com_position=(0, 0, 0.5))
        result = support_lp(ContactSet((contact,)), state, (1, 0))
        assert not result.feasible

    def test_single_contact_infeasible_when_cap_too_low(self):
        contacts = ContactSet((Contact((0, 0, 0), f_max=10.0),))
        state = CentroidalState(com_position=(0, 0, 0.5), mass=30.0)
        result = support_lp(contacts, state, (1, 0))
        assert not result.feasible  # needs 294 N of normal force

    def test_square_support_matches_hull(self, square_contacts, square_state):
        result = support_lp(square_contacts, square_state, (1.0, 0.0))
        assert result.feasible
        assert result.point[0] == pytest.approx(1.0, abs=1e-8)

    def test_zero_active_contacts_rejected(self):
        contacts = ContactSet((Contact((0, 0, 0), active=False),))
        with pytest.raises(ValueError, match="active"):
            support_lp(contacts, CentroidalState(), (1, 0))

    def test_zero_direction_rejected(self, square_contacts, square_state):
        with pytest.raises(ValueError):
            support_lp(square_contacts, square_state, (0.0, 0.0))

    def test_matches_brute_force_on_random_instances(self):
        rng = np.random.default_rng(12)
        for trial in range(6):
            k = int(rng.integers(3, 5))
            pts = rng.uniform(-0.3, 0.3, (k, 2))
            contacts = flat_contacts(pts, mu=0.6)
            state = CentroidalState(com_position=(*pts.mean(axis=0), 0.45))
            theta = rng.uniform(0, 2 * math.pi)
            d = np.array([math.cos(theta), math.sin(theta)])
            result = support_lp(contacts, state, d)
            assert result.feasible
            # oracle: the support point itself must be feasible, and pushing
            # beyond it along d must not be
            assert point_feasible(contacts, state, result.point)
            beyond = result.point + 0.02 * d
            assert not point_feasible(contacts, state, beyond)


class TestFeasibleRegion:
    def test_square_region_matches_square(self, square_contacts, square_state):
        region = feasible_region(square_contacts, square_state, 0.01)
        assert region.kind == "polygon"
        for corner in [(0, 0), (1, 0), (1, 1), (0, 1)]:
            assert min(np.linalg.norm(region.vertices - corner, axis=1)) < 0.011

    def test_single_contact_point_at_origin(self):
        contacts = flat_contacts([(0, 0)])
        state = CentroidalState(com_position=(0, 0, 0.5))
        region = feasible_region(contacts, state, 0.01)
        assert region.kind == "point"
        assert np.allclose(region.vertices[0], [0, 0], atol=1e-8)

    def test_two_contacts_segment_between_feet(self):
        contacts = flat_contacts([(0, 0), (1, 0)])
        state = CentroidalState(com_position=(0.5, 0, 0.5))
        region = feasible_region(contacts, state, 0.01)
        assert region.kind == "segment"
        ends = sorted(region.vertices.tolist())
        assert np.allclose(ends[0], [0, 0], atol=1e-6)
        assert np.allclose(ends[1], [1, 0], atol=1e-6)

    def test_three_collinear_contacts_give_segment(self):
        contacts = flat_contacts([(0, 0), (0.5, 0), (1, 0)])
        state = CentroidalState(com_position=(0.5, 0, 0.5))
        region = feasible_region(contacts, state, 0.01)
        assert region.kind == "segment"

    def test_empty_when_force_caps_too_low(self, quad_state):
        # each cap below m*g/4 leaves the weight unsupported
        contacts = ContactSet(tuple(
            Contact((x, y, 0.0), friction_mu=0.6, f_max=0.9 * 30 * 9.81 / 4)
            for x, y in [(0.35, 0.2), (0.35, -0.2), (-0.35, 0.2), (-0.35, -0.2)]))
        region = feasible_region(contacts, quad_state, 0.01)
        assert region.kind == "empty"

    def test_inner_polygon_inside_outer(self, quad_contacts, quad_state):
        region = feasible_region(quad_contacts, quad_state, 0.005)
        assert region.kind == "polygon"
        for vertex in region.vertices:
            assert polygon_signed_distance(vertex, region.outer_vertices) >= -1e-9

    def test_achieved_tolerance_recorded(self, quad_contacts, quad_state):
        region = feasible_region(quad_contacts, quad_state, 0.01)
        assert 0 <= region.achieved_tolerance <= 0.01

    def test_monotone_refinement(self, quad_contacts, quad_state):
        coarse = feasible_region(quad_contacts, quad_state, 0.02)
        fine = feasible_region(quad_contacts, quad_state, 0.002)
        # shrinking tolerance must not shrink the inner polygon
        assert fine.area() >= coarse.area() - 1e-12

    def test_infinite_friction_gives_exact_contact_hull(self, quad_state):
        pts = [(0.35, 0.2), (0.35, -0.2), (-0.35, 0.2), (-0.35, -0.2)]
        contacts = flat_contacts(pts, mu=math.inf, f_max=math.inf)
        region = feasible_region(contacts, quad_state, 0.005)
        assert region.kind == "polygon"
        for p in pts:
            assert min(np.linalg.norm(region.vertices - p, axis=1)) < 0.006

    def test_friction_limited_region_smaller_than_hull(self):
        # tilted normals with low friction cut the region inside the hull
        pts = [(0.35, 0.2), (0.35, -0.2), (-0.35, 0.2), (-0.35, -0.2)]
        tilt = math.radians(25)
        contacts = ContactSet(tuple(
            Contact((x, y, 0.0), normal=(math.sin(tilt) * np.sign(x), 0, math.cos(tilt)),
                    friction_mu=0.15)
            for x, y in pts))
        state = CentroidalState(com_position=(0, 0, 0.45))
        region = feasible_region(contacts, state, 0.005)
        hull_area = 0.7 * 0.4
        assert region.kind in ("polygon", "segment", "empty")
        if region.kind == "polygon":
            assert region.area() < hull_area - 1e-3

    def test_force_caps_shrink_region(self, quad_state):
        pts = [(0.35, 0.2), (0.35, -0.2), (-0.35, 0.2), (-0.35, -0.2)]
        free = feasible_region(flat_contacts(pts, mu=0.6), quad_state, 0.005)
        weight = 30 * 9.81
        capped_contacts = flat_contacts(pts, mu=0.6, f_max=0.4 * weight)
        capped = feasible_region(capped_contacts, quad_state, 0.005)
        assert capped.kind == "polygon"
        assert capped.area() < free.area() - 1e-4
        # capped region stays inside the friction-only region
        for v in capped.vertices:
            assert polygon_signed_distance(v, free.vertices) >= -0.011

    def test_brute_force_grid_agreement(self, quad_contacts, quad_state):
        region = feasible_region(quad_contacts, quad_state, 0.01)
        xs, ys, feasible = feasibility_grid(quad_contacts, quad_state,
                                            pitch=0.02, margin=0.04)
        for yi, y in enumerate(ys):
            for xi, x in enumerate(xs):
                d = polygon_signed_distance((x, y), region.vertices)
                if feasible[yi, xi]:
                    assert d >= -0.025  # grid pitch + tolerance
                else:
                    assert d <= 0.025

    def test_translation_invariance(self, quad_contacts, quad_state):
        region = feasible_region(quad_contacts, quad_state, 0.005)
        shift = np.array([1.3, -0.7])
        moved_contacts = ContactSet(tuple(
            Contact(c.position + np.array([*shift, 0.0]), c.normal, c.friction_mu, c.f_max)
            for c in quad_contacts.contacts))
        moved_state = CentroidalState(
            com_position=quad_state.com_position + np.array([*shift, 0.0]))
        moved = feasible_region(moved_contacts, moved_state, 0.005)
        assert moved.kind == "polygon"
        # same polygon up to translation (vertex sets within tolerance)
        for v in region.vertices:
            assert min(np.linalg.norm(moved.vertices - (v + shift), axis=1)) < 1e-6

    def test_nonpositive_tolerance_rejected(self, quad_contacts, quad_state):
        with pytest.raises(ValueError):
            feasible_region(quad_contacts, quad_state, 0.0)


class TestExternalWrenches:
    """Moment-balance checks under external forces, torques, and inertia.

    Closed forms on flat ground: a lateral force F_y applied at CoM height
    z_c shifts the admissible-y interval by -z_c * F_y / (m g); a rotational
    wrench component h_x = (I w_dot + w x I w)_x shifts it by -h_x / (m g)
    (the reference set retreats opposite the induced roll).
    """

    FEET = [(0.35, 0.2), (0.35, -0.2), (-0.35, 0.2), (-0.35, -0.2)]

    def test_lateral_force_shifts_region(self):
        contacts = flat_contacts(self.FEET, mu=0.8)
        f_y, z_c, m = 40.0, 0.45, 30.0
        state = CentroidalState(com_position=(0, 0, z_c), mass=m,
                                external_force=(0.0, f_y, 0.0))
        region = feasible_region(contacts, state, 0.002)
        assert region.kind == "polygon"
        shift = -z_c * f_y / (m * 9.81)
        ys = region.vertices[:, 1]
        assert ys.max() == pytest.approx(0.2 + shift, abs=0.004)
        assert ys.min() == pytest.approx(-0.2 + shift, abs=0.004)

    def test_vertical_external_force_rescales_support(self):
        # pressing down with F_z < 0 leaves the flat-ground region the hull;
        # pulling up with F_z = +m g makes balance impossible anywhere
        contacts = flat_contacts(self.FEET, mu=0.8)
        m = 30.0
        pressed = CentroidalState(com_position=(0, 0, 0.45), mass=m,
                                  external_force=(0.0, 0.0, -100.0))
        region = feasible_region(contacts, pressed, 0.005)
        assert region.kind == "polygon"
        assert region.area() == pytest.approx(0.7 * 0.4, abs=0.01)
        lifted = CentroidalState(com_position=(0, 0, 0.45), mass=m,
                                 external_force=(0.0, 0.0, m * 9.81 + 1.0))
        assert feasible_region(contacts, lifted, 0.005).kind == "empty"

    def test_rotational_wrench_shifts_region(self):
        contacts = flat_contacts(self.FEET, mu=0.8)
        m = 30.0
        inertia = np.diag([0.9, 1.9, 2.1])
        w_dot = np.array([30.0, 0.0, 0.0])
        state = CentroidalState(com_position=(0, 0, 0.45), mass=m,
                                angular_acceleration=w_dot, inertia=inertia)
        region = feasible_region(contacts, state, 0.002)
        shift = -float((inertia @ w_dot)[0]) / (m * 9.81)
        ys = region.vertices[:, 1]
        assert ys.max() == pytest.approx(0.2 + shift, abs=0.004)
        assert ys.min() == pytest.approx(-0.2 + shift, abs=0.004)

    def test_zero_inertia_ignores_angular_rates(self, quad_contacts):
        still = CentroidalState(com_position=(0, 0, 0.45))
        spinning = CentroidalState(com_position=(0, 0, 0.45),
                                   angular_velocity=(3.0, 1.0, 2.0),
                                   angular_acceleration=(50.0, -20.0, 10.0))
        a = feasible_region(quad_contacts, still, 0.003)
        b = feasible_region(quad_contacts, spinning, 0.003)
        assert np.allclose(a.vertices, b.vertices)

    def test_wrench_region_matches_grid_oracle(self):
        contacts = flat_contacts(self.FEET, mu=0.8)
        state = CentroidalState(com_position=(0.0, 0.0, 0.45), mass=30.0,
                                external_force=(20.0, 30.0, -10.0),
                                external_torque=(5.0, -4.0, 2.0))
        region = feasible_region(contacts, state, 0.01)
        assert region.kind == "polygon"
        xs, ys, feasible = feasibility_grid(contacts, state, pitch=0.02, margin=0.06)
        for yi, y in enumerate(ys):
            for xi, x in enumerate(xs):
                d = signed_distance((x, y), region)
                if feasible[yi, xi]:
                    assert d >= -0.025
                else:
                    assert d <= 0.025

    def test_segment_shifts_off_the_contact_line(self):
        # the two-contact region need not pass through the contact points
        contacts = flat_contacts([(0.0, 0.0), (0.8, 0.0)], mu=1.0)
        f_y, z_c, m = 30.0, 0.5, 30.0
        state = CentroidalState(com_position=(0.4, 0.0, z_c), mass=m,
                                external_force=(0.0, f_y, 0.0))
        region = feasible_region(contacts, state, 0.005)
        assert region.kind == "segment"
        shift = -z_c * f_y / (m * 9.81)
        assert region.vertices[:, 1] == pytest.approx(shift, abs=1e-6)

    def test_non_coplanar_contacts_match_grid_oracle(self):
        # one foot on a 0.15 m step with tilted normals: rough-terrain stance
        tilt = math.radians(15)
        contacts = ContactSet((
            Contact((0.35, 0.2, 0.15), normal=(math.sin(tilt), 0, math.cos(tilt)),
                    friction_mu=0.5),
            Contact((0.35, -0.2, 0.0), friction_mu=0.5),
            Contact((-0.35, 0.2, 0.0), friction_mu=0.5),
            Contact((-0.35, -0.2, 0.0), normal=(0, -math.sin(tilt), math.cos(tilt)),
                    friction_mu=0.5),
        ))
        state = CentroidalState(com_position=(0.0, 0.0, 0.5))
        region = feasible_region(contacts, state, 0.01)
        assert region.kind == "polygon"
        xs, ys, feasible = feasibility_grid(contacts, state, pitch=0.02, margin=0.05)
        for yi, y in enumerate(ys):
            for xi, x in enumerate(xs):
                d = signed_distance((x, y), region)
                if feasible[yi, xi]:
                    assert d >= -0.025
                else:
                    assert d <= 0.025


class TestSignedDistance:
    def test_center_of_unit_square(self):
        region = FeasibleRegion("polygon", [(0, 0), (1, 0), (1, 1), (0, 1)])
        assert signed_distance((0.5, 0.5), region) == pytest.approx(0.5)

    def test_vertex_is_zero(self):
        region = FeasibleRegion("polygon", [(0, 0), (1, 0), (1, 1), (0, 1)])
        assert signed_distance((0, 0), region) == pytest.approx(0.0, abs=1e-12)

    def test_outside_negative(self):
        region = FeasibleRegion("polygon", [(0, 0), (1, 0), (1, 1), (0, 1)])
        assert signed_distance((1.3, 0.5), region) == pytest.approx(-0.3)

    def test_point_region_metric(self):
        region = FeasibleRegion("point", [(0.2, 0.1)])
        assert signed_distance((0.2, 0.1), region) == 0.0
        assert signed_distance((0.5, 0.5), region) == pytest.approx(-math.hypot(0.3, 0.4))

    def test_segment_region_nonpositive(self):
        region = FeasibleRegion("segment", [(0, 0), (1, 0)])
        assert signed_distance((0.5, 0.0), region) == 0.0
        assert signed_distance((0.5, 0.2), region) == pytest.approx(-0.2)
        assert signed_distance((1.4, 0.0), region) == pytest.approx(-0.4)

    def test_empty_region_rejected(self):
        with pytest.raises(ValueError):
            signed_distance((0, 0), FeasibleRegion("empty", np.zeros((0, 2))))

    def test_matches_independent_polygon_oracle(self):
        rng = np.random.default_rng(5)
        region = FeasibleRegion("polygon", [(0, 0), (1, 0), (1.2, 0.8), (0.4, 1.3), (-0.3, 0.6)])
        for _ in range(50):
            p = rng.uniform(-1, 2, 2)
            assert signed_distance(p, region) == pytest.approx(
                polygon_signed_distance(p, region.vertices), abs=1e-9)


class TestStabilityMargin:
    def test_centroid_margin_half_side(self, square_contacts, square_state):
        result = stability_margin(square_state, square_contacts, 0.01)
        assert result.margin == pytest.approx(0.5, abs=0.011)
        assert not result.unbounded

    def test_icp_outside_negative_distance(self, square_contacts):
        # velocity pushes the ICP 0.1 m beyond the x = 1 edge
        h = 0.5
        v = 0.6 / math.sqrt(h / 9.81)
        state = CentroidalState(com_position=(0.5, 0.5, h), com_velocity=(v, 0, 0))
        result = stability_margin(state, square_contacts, 0.01)
        assert result.margin == pytest.approx(-0.1, abs=0.011)

    def test_point_region_on_point_zero_margin(self):
        contacts = flat_contacts([(0, 0)])
        state = CentroidalState(com_position=(0, 0, 0.5))
        result = stability_margin(state, contacts, 0.01)
        assert result.region.kind == "point"
        assert result.margin == pytest.approx(0.0, abs=1e-8)

    def test_point_region_offset_icp(self):
        contacts = flat_contacts([(0, 0)])
        state = CentroidalState(com_position=(0.25, 0.0, 0.5))
        result = stability_margin(state, contacts, 0.01)
        assert result.margin == pytest.approx(-0.25, abs=1e-8)

    def test_empty_region_flagged_unbounded(self, quad_state):
        contacts = ContactSet(tuple(
            Contact((x, y, 0.0), friction_mu=0.6, f_max=30.0)
            for x, y in [(0.35, 0.2), (0.35, -0.2), (-0.35, 0.2), (-0.35, -0.2)]))
        result = stability_margin(quad_state, contacts, 0.01)
        assert result.unbounded
        assert result.margin is None

    def test_sign_flips_at_boundary_crossing(self, quad_contacts):
        # bisection along +x: the margin changes sign exactly where the ICP
        # crosses the region edge at x = 0.35
        h = 0.45

        def margin_at(com_x):
            state = CentroidalState(com_position=(com_x, 0.0, h))
            return stability_margin(state, quad_contacts, 0.005).margin

        lo, hi = 0.0, 0.6
        assert margin_at(lo) > 0 and margin_at(hi) < 0
        for _ in range(40):
            mid = (lo + hi) / 2
            if margin_at(mid) > 0:
                lo = mid
            else:
                hi = mid
        assert (lo + hi) / 2 == pytest.approx(0.35, abs=0.011)

    def test_yaw_equivariance(self, quad_contacts):
        state = CentroidalState(com_position=(0.1, 0.05, 0.45), com_velocity=(0.2, 0.1, 0))
        base = stability_margin(state, quad_contacts, 0.003)
        yaw = 0.7
        c, s = math.cos(yaw), math.sin(yaw)
        rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
        turned_contacts = ContactSet(tuple(
            Contact(rot @ ct.position, rot @ ct.normal, ct.friction_mu, ct.f_max)
            for ct in quad_contacts.contacts))
        turned_state = CentroidalState(com_position=rot @ state.com_position,
                                       com_velocity=rot @ state.com_velocity)
        turned = stability_margin(turned_state, turned_contacts, 0.003)
        assert turned.margin == pytest.approx(base.margin, abs=0.004)


class TestMarginRecord:
    def test_feature_width_is_47(self):
        assert len(STABILITY_FEATURE_NAMES) == 47

    def test_nominal_stance_record(self, quad_contacts, quad_state):
        feet = np.array([[0.35, 0.2, -0.45], [0.35, -0.2, -0.45],
                         [-0.35, 0.2, -0.45], [-0.35, -0.2, -0.45]])
        row, label = margin_record(quad_state, quad_contacts, feet)
        assert row.shape == (47,)
        flags = row[30:34]
        assert np.array_equal(flags, [1, 1, 1, 1])
        assert label > 0  # nominal stance is stable
        # oracle: the label equals the standalone margin computation
        direct = stability_margin(quad_state, quad_contacts, 0.01)
        assert label == pytest.approx(direct.margin, abs=1e-9)

    def test_unbounded_label_is_nan(self, quad_state):
        contacts = ContactSet(tuple(
            Contact((x, y, 0.0), friction_mu=0.6, f_max=30.0)
            for x, y in [(0.35, 0.2), (0.35, -0.2), (-0.35, 0.2), (-0.35, -0.2)]))
        _, label = margin_record(quad_state, contacts, np.zeros((4, 3)) + [[0, 0, -0.4]] * 4)
        assert math.isnan(label)

    def test_requires_four_contacts(self, quad_state):
        contacts = flat_contacts([(0, 0), (1, 0)])
        with pytest.raises(ValueError, match="four"):
            margin_record(quad_state, contacts, np.zeros((4, 3)))

    def test_reserved_column_is_zero(self, quad_contacts, quad_state):
        row, _ = margin_record(quad_state, quad_contacts, np.zeros((4, 3)))
        assert row[46] == 0.0
        assert STABILITY_FEATURE_NAMES[46] == "reserved"
