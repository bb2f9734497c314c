db.ancestors.aggregate([
  { $graphLookup: {
      from: "ancestors",
      startWith: "$child",
      connectToField: "child",
      connectFromField: "parent",
      as: "a"
  } }
])
