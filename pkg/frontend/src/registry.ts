/**
 * Node kinds the fuzzing pipeline understands. Parses producing anything
 * outside this set are rejected with the offending kind name so callers can
 * skip the file instead of silently truncating it.
 */
export const SUPPORTED_KINDS: ReadonlySet<string> = new Set([
  "Program",
  "EmptyStatement",
  "ExpressionStatement",
  "BlockStatement",
  "VariableDeclaration",
  "VariableDeclarator",
  "FunctionDeclaration",
  "FunctionExpression",
  "ArrowFunctionExpression",
  "ClassDeclaration",
  "ClassExpression",
  "ClassBody",
  "MethodDefinition",
  "ReturnStatement",
  "IfStatement",
  "ForStatement",
  "ForInStatement",
  "ForOfStatement",
  "WhileStatement",
  "DoWhileStatement",
  "SwitchStatement",
  "SwitchCase",
  "BreakStatement",
  "ContinueStatement",
  "LabeledStatement",
  "TryStatement",
  "CatchClause",
  "ThrowStatement",
  "Identifier",
  "Literal",
  "ArrayExpression",
  "ObjectExpression",
  "Property",
  "MemberExpression",
  "CallExpression",
  "NewExpression",
  "AssignmentExpression",
  "BinaryExpression",
  "LogicalExpression",
  "UnaryExpression",
  "UpdateExpression",
  "ConditionalExpression",
  "SequenceExpression",
  "SpreadElement",
  "TemplateLiteral",
  "TemplateElement",
  "TaggedTemplateExpression",
  "ObjectPattern",
  "ArrayPattern",
  "AssignmentPattern",
  "RestElement",
  "Super",
  "ThisExpression",
  "YieldExpression",
  "AwaitExpression",
  "DebuggerStatement",
  "MetaProperty",
]);
