#include "snapseed/isa.hpp"

#include <gtest/gtest.h>

using namespace snapseed;

namespace {

const char *kSmall = R"(
entry Main.main
extern Binder.getCallingUid() : int policy=model-uid

class Base
  field x:int
  method get() : int
    load 0
    getfield Base.x
    return

class Derived extends Base
  field y:int
  method get() : int
    load 0
    getfield Derived.y
    return

class Svc singleton
  static count:int = 3
  field shape:ref<Base>
  method run(a:int) : int interface
    load 1
    const 0
    if_icmplt neg
    invokestatic Binder.getCallingUid
    return
  neg:
    const -1
    return

class Main
  method main() static
    return
)";

} // namespace

TEST(Assemble, RoundTripsThroughRender) {
  Program p = assemble(kSmall);
  Program q = assemble(render(p));
  EXPECT_EQ(p, q);
}

TEST(Assemble, LayoutPutsInheritedFieldsFirst) {
  Program p = assemble(kSmall);
  auto layout = p.instance_layout("Derived");
  ASSERT_EQ(layout.size(), 2u);
  EXPECT_EQ(layout[0].name, "x");
  EXPECT_EQ(layout[1].name, "y");
  EXPECT_EQ(p.field_slot("Derived", "y"), 1u);
}

TEST(Assemble, DispatchPrefersOverride) {
  Program p = assemble(kSmall);
  EXPECT_EQ(resolve_dispatch(p, "Derived", "get").owner, "Derived");
  EXPECT_EQ(p.subclasses_of("Base"), (std::vector<std::string>{"Base", "Derived"}));
}

TEST(Assemble, ParsesLabelLocator) {
  Program p = assemble(kSmall);
  auto loc = p.parse_locator("Svc.run:neg");
  EXPECT_EQ(loc.method, "Svc.run");
  EXPECT_EQ(p.get_method("Svc.run").body[loc.pc].op, Opcode::Const);
  EXPECT_EQ(p.parse_locator("Svc.run@2").pc, 2u);
}

TEST(Assemble, ReportsUnknownOpcodeWithPosition) {
  try {
    assemble("class A\n  method m()\n    frobnicate\n    return\n");
    FAIL();
  } catch (const SyntaxError &e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Assemble, RejectsUnbalancedStack) {
  EXPECT_THROW(assemble("class A\n  method m() : int\n    const 1\n    const 2\n    return\n"), Error);
}

TEST(Assemble, RejectsUnknownField) {
  try {
    assemble("class A\n  method m() : int\n    load 0\n    getfield A.nope\n    return\n");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Resolution);
  }
}

TEST(CallGraph, RanksInterfaceMethodsReachingTarget) {
  Program p = assemble(kSmall);
  auto ranked = call_graph_reachable(p, p.parse_locator("Svc.run:neg"));
  ASSERT_EQ(ranked.size(), 1u);
  EXPECT_EQ(ranked[0].method, "Svc.run");
  EXPECT_EQ(ranked[0].distance, 0);
}
