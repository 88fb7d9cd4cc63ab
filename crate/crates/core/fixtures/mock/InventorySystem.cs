using System.Collections.Generic;
using UnityEngine;

// __CLASS__ stores collected items and exposes use and query operations.
__NOTES__
public class __CLASS__ : MonoBehaviour
{
    [SerializeField] private int capacity = 20;
    [SerializeField] private bool stackIdenticalItems = true;

    private readonly Dictionary<string, int> items = new Dictionary<string, int>();

    public int Count => items.Count;

    public bool AddItem(string itemId, int amount = 1)
    {
        if (items.ContainsKey(itemId) && stackIdenticalItems)
        {
            items[itemId] += amount;
            return true;
        }
        if (items.Count >= capacity)
        {
            return false;
        }
        items[itemId] = amount;
        return true;
    }

    public bool RemoveItem(string itemId, int amount = 1)
    {
        if (!items.TryGetValue(itemId, out int held) || held < amount)
        {
            return false;
        }
        if (held == amount)
        {
            items.Remove(itemId);
        }
        else
        {
            items[itemId] = held - amount;
        }
        return true;
    }

    public bool HasItem(string itemId)
    {
        return items.ContainsKey(itemId);
    }

    public int GetAmount(string itemId)
    {
        return items.TryGetValue(itemId, out int held) ? held : 0;
    }
}
