// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "support.hpp"
#include "vplat/annotations.hpp"
#include "vplat/asset_ops.hpp"
#include "vplat/feature_ops.hpp"

namespace vplat {
namespace {

using testing::make_asset;
using testing::make_child;

// BC owns "BC\n\tDIV\n\tMULT\n" with Operators.js{divide[DIV], multiply[MULT]};
// SC owns "SC\n\tLOG\n" with Arithmetic.js{log[LOG]}.
struct Calc : ::testing::Test {
  Workspace ws;
  AssetId bc, src, ops_js, divide, multiply, sc, arith, log_m;
  ModelId bc_model, sc_model;

  void SetUp() override {
    bc = make_asset(ws, "BC", AssetType::Repository);
    src = make_child(ws, bc, "src", AssetType::Folder);
    ops_js = make_child(ws, src, "Operators.js", AssetType::File);
    divide = make_child(ws, ops_js, "divide", AssetType::Method, "a / b");
    multiply = make_child(ws, ops_js, "multiply", AssetType::Method, "a * b");
    ops::add_asset(ws, bc, ws.tree.root());
    bc_model = ops::add_feature_model_from_text(ws, bc, "BC\n\tDIV\n\tMULT\n");
    ops::map_asset_to_feature(ws, divide, "DIV");
    ops::map_asset_to_feature(ws, multiply, "MULT");
    sc = make_asset(ws, "SC", AssetType::Repository);
    arith = make_child(ws, sc, "Arithmetic.js", AssetType::File);
    log_m = make_child(ws, arith, "log", AssetType::Method, "ln a");
    ops::add_asset(ws, sc, ws.tree.root());
    sc_model = ops::add_feature_model_from_text(ws, sc, "SC\n\tLOG\n");
    ops::map_asset_to_feature(ws, log_m, "LOG");
  }

  FeatureId f(const std::string& qualified) { return ws.resolve_feature(qualified); }
  FeatureId bc_root() { return ws.features.model(bc_model).root; }
  FeatureId sc_root() { return ws.features.model(sc_model).root; }
  bool has(ModelId m, const std::string& name) { return ws.features.find(m, name).has_value(); }
};

// ---- addFeature ----

TEST_F(Calc, AddFeatureStampsModelVersion) {
  const AssetId d2 = make_asset(ws, "mod", AssetType::Method);
  ws.tree.get_mut(d2).pc = PresenceCondition::literal("MOD");
  ops::add_asset(ws, d2, ops_js);
  ASSERT_EQ(ws.features.model_version(bc_model), 1u);
  const FeatureId exp = ops::add_feature(ws, "EXP", bc_root());
  EXPECT_EQ(ws.features.model_version(bc_model), 2u);
  EXPECT_EQ(ws.features.get(exp).version, 2u);
  EXPECT_EQ(ws.features.get(exp).parent, bc_root());
  EXPECT_EQ(ws.feature_path(exp), "BC/EXP");
  EXPECT_EQ(ws.log.back().op, opname::kAddFeature);
}

TEST_F(Calc, AddDuplicateFeature) {
  const std::size_t n = ws.log.size();
  EXPECT_VPLAT_ERROR(ops::add_feature(ws, "DIV", bc_root()), DuplicateFeatureName);
  EXPECT_EQ(ws.log.size(), n);
}

TEST_F(Calc, AddUnderTheBucket) {
  const FeatureId bucket = ws.features.model(bc_model).unassigned;
  const FeatureId x = ops::add_feature(ws, "X", bucket);
  EXPECT_EQ(ws.features.get(x).parent, bucket);
}

TEST_F(Calc, AddFeatureRejectsBadNames) {
  EXPECT_VPLAT_ERROR(ops::add_feature(ws, "two words", bc_root()), InvalidName);
  EXPECT_VPLAT_ERROR(ops::add_feature(ws, "", bc_root()), InvalidName);
}

// ---- addFeatureModelToAsset ----

TEST_F(Calc, AttachedModelMakesSubAssetsMappable) {
  const AssetId gc = make_asset(ws, "GC", AssetType::Repository);
  const AssetId plot = make_child(ws, gc, "plot.js", AssetType::File);
  ops::add_asset(ws, gc, ws.tree.root());
  EXPECT_VPLAT_ERROR(ops::map_asset_to_feature(ws, plot, "PLOT"), NoFeatureModelInScope);
  const ModelId m = instantiate_feature_model(ws.features, parse_feature_model_file("GC\n\tPLOT\n"));
  const Version g = ws.tree.global_version();
  ops::add_feature_model_to_asset(ws, gc, m);
  EXPECT_EQ(ws.tree.get(gc).version, g + 1);
  EXPECT_EQ(ws.model_in_scope(plot), m);
  ops::map_asset_to_feature(ws, plot, "PLOT");
  EXPECT_EQ(ws.mapped_assets(f("GC/PLOT")), std::vector<AssetId>{plot});
}

TEST_F(Calc, SecondModelIsRejected) {
  const ModelId m = instantiate_feature_model(ws.features, parse_feature_model_file("BC2\n"));
  EXPECT_VPLAT_ERROR(ops::add_feature_model_to_asset(ws, bc, m), FeatureModelAlreadyPresent);
}

TEST_F(Calc, FileMayOwnAModel) {
  const ModelId m = instantiate_feature_model(ws.features, parse_feature_model_file("OPS\n\tFAST\n"));
  ops::add_feature_model_to_asset(ws, ops_js, m);
  EXPECT_EQ(ws.model_in_scope(divide), m);
  EXPECT_EQ(ws.model_in_scope(src), bc_model);
  // DIV and MULT move into the new scope's bucket.
  EXPECT_EQ(ws.features.get(*ws.features.find(m, "DIV")).parent, ws.features.model(m).unassigned);
  EXPECT_TRUE(ws.check_invariants().empty());
}

// ---- removeFeature ----

TEST_F(Calc, RemovingDivRemovesDivide) {
  ops::remove_feature(ws, f("BC/DIV"));
  EXPECT_FALSE(has(bc_model, "DIV"));
  EXPECT_FALSE(ws.tree.attached(divide));
  EXPECT_TRUE(ws.tree.attached(multiply));
  EXPECT_TRUE(ws.check_invariants().empty());
}

TEST_F(Calc, RemovingOneOfTwoLiteralsRewritesToFalse) {
  ws.tree.get_mut(multiply).pc = PresenceCondition::parse("MULT | ADD");
  ops::add_feature(ws, "ADD", bc_root());
  ops::remove_feature(ws, f("BC/MULT"));
  EXPECT_TRUE(ws.tree.attached(multiply));
  EXPECT_EQ(ws.tree.get(multiply).pc.to_string(), "false | ADD");
}

TEST_F(Calc, RemoveStampsFormerParent) {
  const FeatureId num = ops::add_feature(ws, "NUM", bc_root());
  const FeatureId in = ops::add_feature(ws, "INT", num);
  ops::remove_feature(ws, in);
  EXPECT_EQ(ws.features.get(num).version, ws.features.model_version(bc_model));
}

TEST_F(Calc, RemovingSubFeaturesCascades) {
  ops::move_feature(ws, f("BC/MULT"), f("BC/DIV"));
  ops::remove_feature(ws, f("BC/DIV"));
  EXPECT_FALSE(has(bc_model, "MULT"));
  EXPECT_FALSE(ws.tree.attached(multiply));
}

TEST_F(Calc, BucketAndRootCannotBeRemoved) {
  EXPECT_VPLAT_ERROR(ops::remove_feature(ws, ws.features.model(bc_model).unassigned), CannotRemoveUnassigned);
  EXPECT_VPLAT_ERROR(ops::remove_feature(ws, bc_root()), CannotRemoveRoot);
}

// ---- moveFeature ----

TEST_F(Calc, MoveWithinModelReparents) {
  const FeatureId arithf = ops::add_feature(ws, "ARITH", bc_root());
  const FeatureId exp = ops::add_feature(ws, "EXP", bc_root());
  ops::move_feature(ws, exp, arithf);
  EXPECT_EQ(ws.feature_path(exp), "BC/ARITH/EXP");
  EXPECT_EQ(ws.features.get(exp).version, ws.features.model_version(bc_model));
  EXPECT_EQ(ws.log.back().op, opname::kMoveFeature);
}

TEST_F(Calc, MoveIntoOwnDescendantIsACycle) {
  const FeatureId in = ops::add_feature(ws, "INT", f("BC/DIV"));
  const std::string before = testing::canonical_dump(ws);
  EXPECT_VPLAT_ERROR(ops::move_feature(ws, f("BC/DIV"), in), CycleDetected);
  EXPECT_EQ(testing::canonical_dump(ws), before);
}

TEST_F(Calc, MoveToTheBucket) {
  ops::move_feature(ws, f("BC/DIV"), ws.features.model(bc_model).unassigned);
  EXPECT_EQ(ws.feature_path(f("BC/DIV")), "BC/UNASSIGNED/DIV");
}

TEST_F(Calc, MoveAcrossModelsMatchesCloneThenRemove) {
  Workspace manual = ws;
  ops::move_feature(ws, f("BC/DIV"), sc_root());
  ops::clone_feature(manual, manual.resolve_feature("BC/DIV"),
                     manual.features.model(*manual.tree.get(manual.resolve_asset("SC")).model).root);
  ops::remove_feature(manual, manual.resolve_feature("BC/DIV"));
  EXPECT_EQ(testing::canonical_dump(ws), testing::canonical_dump(manual));
  EXPECT_FALSE(has(bc_model, "DIV"));
  EXPECT_EQ(ws.mapped_assets(f("SC/DIV")).size(), 1u);
}

// ---- makeFeatureOptional ----

TEST_F(Calc, MakeOptional) {
  const FeatureId exp = ops::add_feature(ws, "EXP", bc_root());
  ASSERT_FALSE(ws.features.get(exp).optional);
  const Version mv = ws.features.model_version(bc_model);
  EXPECT_TRUE(ops::make_feature_optional(ws, exp));
  EXPECT_TRUE(ws.features.get(exp).optional);
  EXPECT_EQ(ws.features.model_version(bc_model), mv + 1);
  EXPECT_TRUE(ops::make_feature_optional(ws, exp));
  EXPECT_TRUE(ws.features.get(exp).optional);
  EXPECT_TRUE(ops::make_feature_optional(ws, bc_root()));
}

// ---- renameFeature ----

TEST_F(Calc, RenameRewritesMappings) {
  ops::rename_feature(ws, f("BC/DIV"), "DIVIDE");
  EXPECT_EQ(ws.tree.get(divide).pc.to_string(), "DIVIDE | true");
  EXPECT_VPLAT_ERROR(ops::rename_feature(ws, f("BC/DIVIDE"), "MULT"), DuplicateFeatureName);
  EXPECT_FALSE(ops::rename_feature(ws, f("BC/DIVIDE"), "DIVIDE"));
}

// ---- cloneFeature ----

struct Exp : Calc {
  AssetId exponent, exp_txt;
  void SetUp() override {
    Calc::SetUp();
    ops::add_feature(ws, "EXP", bc_root());
    exponent = make_asset(ws, "exponent", AssetType::Method, "a ** b");
    ops::add_asset(ws, exponent, ops_js);
    exp_txt = make_asset(ws, "exp.txt", AssetType::File, "power");
    ops::add_asset(ws, exp_txt, bc);
    ops::map_asset_to_feature(ws, exponent, "EXP");
    ops::map_asset_to_feature(ws, exp_txt, "EXP");
  }
};

TEST_F(Exp, CloneSlicesTheContainer) {
  const std::size_t at = ws.traces.asset_traces().size();
  const std::size_t ft = ws.traces.feature_traces().size();
  const FeatureId c = ops::clone_feature(ws, f("BC/EXP"), sc_root());
  EXPECT_EQ(ws.feature_path(c), "SC/EXP");
  const AssetId sliced = ws.resolve_asset("SC/src/Operators.js");
  std::vector<std::string> kids;
  for (AssetId k : ws.tree.get(sliced).children) kids.push_back(ws.tree.get(k).name);
  EXPECT_EQ(kids, std::vector<std::string>{"exponent"});
  const AssetId exp_copy = ws.resolve_asset("SC/exp.txt");
  EXPECT_EQ(ws.tree.get(exp_copy).content, "power");
  // src, Operators.js, exponent, exp.txt.
  EXPECT_EQ(ws.traces.asset_traces().size(), at + 4);
  EXPECT_EQ(ws.traces.feature_traces().size(), ft + 1);
  EXPECT_EQ(ws.traces.feature_traces().back().version_at, ws.features.model_version(bc_model));
  EXPECT_EQ(ws.mapped_assets(c), (std::vector<AssetId>{ws.resolve_asset("SC/src/Operators.js/exponent"), exp_copy}));
  EXPECT_FALSE(ws.features.get(c).incomplete);
  EXPECT_TRUE(ws.check_invariants().empty());
}

TEST_F(Exp, SecondCloneReusesSlicedContainers) {
  ops::clone_feature(ws, f("BC/EXP"), sc_root());
  ops::clone_feature(ws, f("BC/DIV"), sc_root());
  const AssetId sliced = ws.resolve_asset("SC/src/Operators.js");
  EXPECT_EQ(ws.tree.get(sliced).children.size(), 2u);
  EXPECT_EQ(ws.tree.get(ws.resolve_asset("SC/src")).children.size(), 1u);
}

TEST_F(Exp, CloningAnUnmappedLeaf) {
  ops::add_feature(ws, "SQRT", bc_root());
  const std::size_t at = ws.traces.asset_traces().size();
  const std::size_t ft = ws.traces.feature_traces().size();
  ops::clone_feature(ws, f("BC/SQRT"), sc_root());
  EXPECT_EQ(ws.traces.asset_traces().size(), at);
  EXPECT_EQ(ws.traces.feature_traces().size(), ft + 1);
}

TEST_F(Exp, CloneOntoExistingNameFails) {
  ops::add_feature(ws, "EXP", sc_root());
  const std::string before = testing::canonical_dump(ws);
  EXPECT_VPLAT_ERROR(ops::clone_feature(ws, f("BC/EXP"), sc_root()), DuplicateFeatureName);
  EXPECT_EQ(testing::canonical_dump(ws), before);
}

TEST_F(Exp, CloneCopiesSubFeaturesAndFlags) {
  ops::make_feature_optional(ws, f("BC/EXP"));
  ops::add_feature(ws, "SQUARE", f("BC/EXP"));
  const FeatureId c = ops::clone_feature(ws, f("BC/EXP"), sc_root());
  EXPECT_TRUE(ws.features.get(c).optional);
  EXPECT_EQ(ws.feature_path(f("SC/EXP/SQUARE")), "SC/EXP/SQUARE");
  EXPECT_TRUE(ws.traces.is_clone(f("BC/EXP/SQUARE"), f("SC/EXP/SQUARE")));
}

TEST_F(Exp, CloneBelowItselfIsACycle) {
  EXPECT_VPLAT_ERROR(ops::clone_feature(ws, f("BC/EXP"), f("BC/EXP")), CycleDetected);
}

// ---- propagateFeature ----

TEST_F(Exp, PropagateNewSubFeaturesAndChangedAssets) {
  ops::clone_feature(ws, f("BC/DIV"), sc_root());
  const FeatureId div = f("BC/DIV");
  ops::add_feature(ws, "INT", div);
  ops::add_feature(ws, "FLOAT", div);
  ops::change_asset(ws, divide, std::string("b == 0 ? 0 : a / b"));
  ASSERT_TRUE(ops::propagate_feature(ws, div, f("SC/DIV")));
  EXPECT_TRUE(ws.traces.is_clone(f("BC/DIV/INT"), f("SC/DIV/INT")));
  EXPECT_TRUE(ws.traces.is_clone(f("BC/DIV/FLOAT"), f("SC/DIV/FLOAT")));
  EXPECT_EQ(ws.tree.get(ws.resolve_asset("SC/src/Operators.js/divide")).content, "b == 0 ? 0 : a / b");
  EXPECT_EQ(ws.log.back().op, opname::kPropagateFeature);
  EXPECT_TRUE(ws.check_invariants().empty());
}

TEST_F(Exp, PropagateNewlyMappedAsset) {
  ops::clone_feature(ws, f("BC/EXP"), sc_root());
  const AssetId sq = make_asset(ws, "square", AssetType::Method, "a * a");
  ops::add_asset(ws, sq, ops_js);
  ops::map_asset_to_feature(ws, sq, "EXP");
  ASSERT_TRUE(ops::propagate_feature(ws, f("BC/EXP"), f("SC/EXP")));
  const AssetId copy = ws.resolve_asset("SC/src/Operators.js/square");
  EXPECT_TRUE(ws.traces.is_clone(sq, copy));
  EXPECT_TRUE(ws.tree.get(copy).pc.mentions("EXP"));
}

TEST_F(Exp, PropagateRenameAndFlags) {
  ops::clone_feature(ws, f("BC/EXP"), sc_root());
  ops::rename_feature(ws, f("BC/EXP"), "POW");
  ops::make_feature_optional(ws, f("BC/POW"));
  ASSERT_TRUE(ops::propagate_feature(ws, f("BC/POW"), f("SC/EXP")));
  EXPECT_TRUE(ws.features.get(f("SC/POW")).optional);
  EXPECT_TRUE(ws.tree.get(ws.resolve_asset("SC/exp.txt")).pc.mentions("POW"));
}

TEST_F(Exp, RepeatedPropagateIsANoOp) {
  ops::clone_feature(ws, f("BC/EXP"), sc_root());
  EXPECT_FALSE(ops::propagate_feature(ws, f("BC/EXP"), f("SC/EXP")));
  ops::add_feature(ws, "SQUARE", f("BC/EXP"));
  ASSERT_TRUE(ops::propagate_feature(ws, f("BC/EXP"), f("SC/EXP")));
  const std::string after = testing::canonical_dump(ws);
  const std::size_t n = ws.log.size();
  EXPECT_FALSE(ops::propagate_feature(ws, f("BC/EXP"), f("SC/EXP")));
  EXPECT_EQ(testing::canonical_dump(ws), after);
  EXPECT_EQ(ws.log.size(), n);
}

TEST_F(Exp, PropagateRetainsCloneSideSubFeatures) {
  ops::clone_feature(ws, f("BC/EXP"), sc_root());
  ops::add_feature(ws, "LOCAL", f("SC/EXP"));
  ops::add_feature(ws, "SQUARE", f("BC/EXP"));
  ops::propagate_feature(ws, f("BC/EXP"), f("SC/EXP"));
  EXPECT_EQ(ws.feature_path(f("SC/EXP/LOCAL")), "SC/EXP/LOCAL");
}

TEST_F(Exp, UnrelatedFeaturesAreNotClones) {
  EXPECT_VPLAT_ERROR(ops::propagate_feature(ws, f("BC/EXP"), f("SC/LOG")), NotAClone);
}

}  // namespace
}  // namespace vplat

namespace vplat {
namespace {

TEST(CalculatorScenario, Checkpoints) {
  const auto r = testing::run_calculator();
  const Workspace& ws = r.ws;
  EXPECT_EQ(r.global_before_divide, 3u);
  EXPECT_EQ(r.global_after_divide, 4u);
  EXPECT_EQ(r.divide_version_at_clone, 4u);
  EXPECT_EQ(r.clone_version_at_clone, 4u);
  EXPECT_EQ(r.traces_after_clone_asset, 1u);
  EXPECT_EQ(r.divide_version_before_propagation, 8u);
  EXPECT_EQ(r.clone_version_before_propagation, 4u);
  EXPECT_EQ(r.model_before_exp, 1u);
  EXPECT_EQ(r.model_after_exp, 2u);
  EXPECT_EQ(ws.features.get(ws.resolve_feature("SC/UNASSIGNED/DIV")).name, "DIV");
  EXPECT_EQ(ws.tree.get(ws.resolve_asset("SC/src/Arithmetic.js/divide")).content,
            ws.tree.get(ws.resolve_asset("BC/src/Operators.js/divide")).content);
  EXPECT_TRUE(ws.traces.is_clone(ws.resolve_feature("BC/EXP"), ws.resolve_feature("SC/EXP")));
  EXPECT_TRUE(ws.traces.is_clone(ws.resolve_asset("BC/src/Operators.js/exponent"),
                                 ws.resolve_asset("SC/src/Operators.js/exponent")));
  EXPECT_TRUE(ws.traces.is_clone(ws.resolve_asset("BC/exp.txt"), ws.resolve_asset("SC/exp.txt")));
  EXPECT_TRUE(ws.check_invariants().empty());
}

}  // namespace
}  // namespace vplat
